"""Scenario runner: worlds, obstacle scripts, baseline, CSV logs.

A scenario JSON picks a world ("arm" or "car1d"), a robot, a path, the
limits, and a list of scripted obstacles; run_scenario plays it out
with the chosen controller and writes one log row per control cycle.
run_race pits the tracking controller against the reactive
keep-your-distance baseline on the shared-wall drag strip.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .constraints import LimitSpec, admissible_u, build_constraints
from .executor import CONTACT_VIOLATION, ObstacleInfo, SafeExecutor, STOPPED_EPS
from .path import build_spline, discretize, line_path, load_waypoints_json
from .reach import compute_stoppable_sets, compute_tables
from .robots import PointBody, centers_over_grid, planar_arm, spatial_arm

LOG_FIXED_COLUMNS = ["t", "stage", "s", "sdot", "j_stop", "min_dist", "psi_min"]

# Declared speed bound handed to the controller for obstacles that a
# script never moves: small but positive, since the bound is a rate.
STATIC_V_MAX = 1e-12


# ---------------------------------------------------------------------------
# Obstacle scripts
# ---------------------------------------------------------------------------

class ObstacleScript:
    """Base: a moving sphere with a declared speed bound."""

    def __init__(self, id, pos, radius, v_max):
        self.id = str(id)
        self.pos = np.asarray(pos, dtype=float).copy()
        self.radius = float(radius)
        self.v_max = float(v_max)

    def obstacle(self):
        return ObstacleInfo(id=self.id, position=self.pos.copy(),
                            v_max=max(self.v_max, STATIC_V_MAX), radius=self.radius)

    def update(self, t, dt, robot_centers):
        pass

    def _move_toward(self, target, dt, speed=None):
        """Step toward target, never exceeding the declared speed bound."""
        speed = self.v_max if speed is None else min(speed, self.v_max)
        delta = np.asarray(target, dtype=float) - self.pos
        dist = float(np.linalg.norm(delta))
        step = speed * dt
        if dist <= step or dist == 0.0:
            self.pos = np.asarray(target, dtype=float).copy()
        else:
            self.pos += delta * (step / dist)


class StaticScript(ObstacleScript):
    def __init__(self, id, pos, radius, v_max=0.0):
        super().__init__(id, pos, radius, v_max)


class BounceScript(ObstacleScript):
    """Shuttles between two endpoints at constant speed."""

    def __init__(self, id, p0, p1, radius, v_max, start_phase=0.0):
        super().__init__(id, p0, radius, v_max)
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        self.heading = 1.0
        self.frac = float(start_phase) % 1.0
        self.length = float(np.linalg.norm(self.p1 - self.p0))
        self.pos = self.p0 + self.frac * (self.p1 - self.p0)

    def update(self, t, dt, robot_centers):
        if self.length == 0.0:
            return
        self.frac += self.heading * self.v_max * dt / self.length
        if self.frac > 1.0:
            self.frac = 2.0 - self.frac
            self.heading = -1.0
        elif self.frac < 0.0:
            self.frac = -self.frac
            self.heading = 1.0
        self.pos = self.p0 + self.frac * (self.p1 - self.p0)


class PursuitScript(ObstacleScript):
    """Chases the nearest robot sphere at full declared speed.

    With approach_time/retreat_time set it alternates between pursuing
    and withdrawing to its spawn position; pure pursuit never retreats,
    so a goal behind the frozen robot would otherwise stay unreachable.
    """

    def __init__(self, id, pos, radius, v_max, approach_time=np.inf, retreat_time=0.0):
        super().__init__(id, pos, radius, v_max)
        self.home = self.pos.copy()
        self.approach_time = float(approach_time)
        self.retreat_time = float(retreat_time)

    def update(self, t, dt, robot_centers):
        cycle = self.approach_time + self.retreat_time
        phase = t if not np.isfinite(cycle) else t % cycle
        if phase < self.approach_time:
            diff = robot_centers - self.pos
            target = robot_centers[int(np.argmin(np.einsum("ij,ij->i", diff, diff)))]
        else:
            target = self.home
        self._move_toward(target, dt)


class WallScript(ObstacleScript):
    """1-D wall on the x axis: approach, touch, dwell, retreat home.

    Approaches the nearest body at constant speed, stops exactly at
    contact, waits dwell seconds, then returns to its home position
    and rests there.
    """

    def __init__(self, id, home, v_max, dwell, radius=0.0):
        super().__init__(id, [float(home), 0.0, 0.0], radius, v_max)
        self.home = float(home)
        self.dwell = float(dwell)
        self.phase = "approach"
        self.t_touch = None

    def update(self, t, dt, robot_centers):
        front = float(np.max(robot_centers[:, 0]))
        if self.phase == "approach":
            gap = self.pos[0] - self.radius - front
            step = self.v_max * dt
            if gap <= step:
                self.pos[0] -= max(gap, 0.0)
                self.phase = "dwell"
                self.t_touch = t
            else:
                self.pos[0] -= step
        elif self.phase == "dwell":
            if t - self.t_touch >= self.dwell:
                self.phase = "retreat"
        elif self.phase == "retreat":
            self.pos[0] += self.v_max * dt
            if self.pos[0] >= self.home:
                self.pos[0] = self.home
                self.phase = "rest"


class ExternalScript(ObstacleScript):
    """Obstacle driven from outside (the session service).

    Commands are absolute target positions; each tick the obstacle
    moves toward the latest target, clamped to its speed bound, so a
    client teleporting the cursor cannot outrun the declared v_max.
    """

    def __init__(self, id, pos, radius, v_max):
        super().__init__(id, pos, radius, v_max)
        self.target = self.pos.copy()

    def set_target(self, pos):
        self.target = np.asarray(pos, dtype=float).copy()

    def update(self, t, dt, robot_centers):
        self._move_toward(self.target, dt)


def make_script(cfg, index, rng):
    kind = cfg.get("script", "static")
    oid = cfg.get("id", f"obs{index}")
    radius = cfg.get("radius", 0.05)
    v_max = cfg.get("v_max", cfg.get("speed", 0.0))
    sub_rng = np.random.default_rng(cfg["seed"]) if "seed" in cfg else rng
    if kind == "static":
        return StaticScript(oid, cfg["pos"], radius, v_max)
    if kind == "bounce":
        return BounceScript(oid, cfg["p0"], cfg["p1"], radius, v_max,
                            cfg.get("start_phase", sub_rng.uniform()))
    if kind == "pursuit":
        pos = cfg.get("pos")
        if pos is None:
            # Seeded spawn on a ring around the workcell origin.
            ang = sub_rng.uniform(0.0, 2.0 * np.pi)
            r = sub_rng.uniform(*cfg.get("spawn_ring", (1.2, 1.8)))
            pos = [r * np.cos(ang), r * np.sin(ang), cfg.get("z", 0.0)]
        return PursuitScript(oid, pos, radius, v_max,
                             cfg.get("approach_time", np.inf),
                             cfg.get("retreat_time", 0.0))
    if kind == "scripted-wall":
        return WallScript(oid, cfg.get("home", 30.0), v_max, cfg.get("dwell", 1.0),
                          radius)
    if kind == "external":
        return ExternalScript(oid, cfg.get("pos", [0.0, 0.0, 0.0]), radius, v_max)
    raise ValueError(f"unknown obstacle script {kind!r}")


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------

@dataclass
class Scenario:
    world: str = "arm"
    robot: dict = field(default_factory=lambda: {"kind": "planar", "dof": 3})
    path: dict = None
    limits: dict = None
    N: int = 150
    M: int = 30
    d_protective: float = 0.0
    dt: float = 0.004
    duration: float = 10.0
    seed: int = 0
    obstacles: list = field(default_factory=list)
    controller: str = "ours"
    stop_psi_throughout: bool = False
    # car1d extras
    goal: float = 25.0
    wall: dict = field(default_factory=lambda: {"home": 30.0, "v_max": 20.0, "dwell": 1.0})

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**d)


def load_scenario(path):
    with open(path) as f:
        return Scenario.from_dict(json.load(f))


def make_robot(cfg):
    kind = cfg.get("kind", "planar")
    if kind == "planar":
        return planar_arm(dof=cfg.get("dof", 3), reach=cfg.get("reach", 1.2),
                          spheres_per_link=cfg.get("spheres_per_link", 3),
                          sphere_radius=cfg.get("sphere_radius", 0.06))
    if kind == "spatial":
        return spatial_arm(reach=cfg.get("reach", 1.5),
                           spheres_per_link=cfg.get("spheres_per_link", 2),
                           sphere_radius=cfg.get("sphere_radius", 0.07))
    if kind == "point":
        return PointBody(radius=cfg.get("radius", 0.0))
    raise ValueError(f"unknown robot kind {cfg.get('kind')!r}")


@dataclass
class World:
    """Everything run_scenario and the service share."""

    robot: object
    grid: object
    limits: LimitSpec
    constraints: list
    family: object
    tables: object
    centers: np.ndarray
    executor: SafeExecutor


def build_world(scn, precomputed=None):
    """Assemble a world; `precomputed` is an ArtifactBundle to reuse."""
    robot = make_robot(scn.robot)
    if precomputed is not None:
        grid = precomputed.grid
        lim = precomputed.limits
        family = precomputed.family
        tables = precomputed.tables
        centers = precomputed.centers
        constraints = build_constraints(grid, lim)
        if centers.shape[1] != robot.n_spheres:
            raise ValueError("artifact robot geometry disagrees with scenario robot")
    else:
        if scn.world == "car1d":
            path = line_path(np.zeros(1), np.array([float(scn.goal)]))
            limits = scn.limits or {"v_max": [20.0], "a_max": [100.0]}
        elif scn.world == "arm":
            if scn.path is None:
                raise ValueError("arm scenario needs a path")
            if "file" in scn.path:
                waypoints = load_waypoints_json(scn.path["file"])
            else:
                waypoints = np.asarray(scn.path["waypoints"], dtype=float)
            path = build_spline(waypoints)
            if scn.limits is None:
                raise ValueError("arm scenario needs limits")
            limits = scn.limits
        else:
            raise ValueError(f"unknown world {scn.world!r}")
        grid = discretize(path, scn.N)
        lim = LimitSpec(v_max=np.asarray(limits["v_max"], dtype=float),
                        a_max=np.asarray(limits["a_max"], dtype=float))
        constraints = build_constraints(grid, lim)
        family = compute_stoppable_sets(constraints, grid)
        tables = compute_tables(family, constraints, grid, scn.M)
        centers = centers_over_grid(robot, grid)
    ex = SafeExecutor(grid, constraints, family, tables, centers,
                      robot.sphere_radii, d_protective=scn.d_protective, dt=scn.dt,
                      stop_psi_throughout=scn.stop_psi_throughout)
    return World(robot=robot, grid=grid, limits=lim, constraints=constraints,
                 family=family, tables=tables, centers=centers, executor=ex)


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

def log_header(dof):
    cols = list(LOG_FIXED_COLUMNS)
    for name in ("q", "qdot", "qddot"):
        cols += [f"{name}{d}" for d in range(dof)]
    cols.append("contact_class")
    return cols


def state_row(st):
    row = [f"{st.t:.6f}", st.stage, f"{st.s:.9f}", f"{st.sdot:.9f}", st.j_stop,
           f"{st.min_dist:.9f}", f"{st.psi_min:.9f}"]
    for arr in (st.q, st.qdot, st.qddot):
        row += [f"{v:.9f}" for v in np.atleast_1d(arr)]
    row.append(st.contact_class)
    return row


def write_log_csv(path, states, dof):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(log_header(dof))
        for st in states:
            w.writerow(state_row(st))


# ---------------------------------------------------------------------------
# Baseline
# ---------------------------------------------------------------------------

@dataclass
class Baseline:
    """Reactive speed scaling: keep enough distance to out-brake the obstacle.

    Commanded velocity obeys v_next <= max(0, (d - d_protective -
    v_obs_max * t_stop) / t_stop), further clipped by the path velocity
    cap and the per-cycle acceleration bounds of the current stage.
    """

    grid: object
    constraints: list
    d_protective: float = 0.0
    t_stop: float = 0.55

    def __post_init__(self):
        self.s = 0.0
        self.v = 0.0
        self.t = 0.0
        self.i = 0
        self.arrived = False

    def step(self, dt, clearance, v_obs_max):
        if self.arrived:
            self.t += dt
            return 0.0
        sc = self.constraints[self.i]
        allowed = max(0.0, (clearance - self.d_protective
                            - v_obs_max * self.t_stop) / self.t_stop)
        v_cap = min(allowed, float(np.sqrt(sc.x_max)))
        bounds = admissible_u(sc, self.v * self.v)
        u_lo, u_hi = bounds if bounds is not None else (-np.inf, np.inf)
        self.v = float(np.clip(v_cap, max(self.v + u_lo * dt, 0.0), self.v + u_hi * dt))
        self.s += self.v * dt
        self.t += dt
        if self.s >= self.grid.stages[-1]:
            self.s = float(self.grid.stages[-1])
            self.arrived = True
            self.v = 0.0
        self.i = min(int(np.searchsorted(self.grid.stages, self.s, side="right")) - 1,
                     self.grid.n_segments - 1)
        return self.v


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _interp_centers(world, s):
    grid = world.grid
    i = min(int(np.searchsorted(grid.stages, s, side="right")) - 1,
            grid.n_segments - 1)
    w = (s - grid.stages[i]) / grid.deltas[i]
    return (1.0 - w) * world.centers[i] + w * world.centers[i + 1]


def run_scenario(scn, csv_path=None, keep_states=True, precomputed=None):
    """Play a scenario to arrival or timeout; returns (summary, states)."""
    rng = np.random.default_rng(scn.seed)
    world = build_world(scn, precomputed=precomputed)
    scripts = [make_script(cfg, idx, rng) for idx, cfg in enumerate(scn.obstacles)]
    if scn.controller == "baseline":
        return _run_baseline(scn, world, scripts, csv_path)
    ex = world.executor
    states = []
    summary = {
        "arrival_time": None, "violations": 0, "min_distance_at_stop": np.inf,
        "arrived": False, "min_dist": np.inf, "contacts": 0, "steps": 0,
        "lp_fallbacks": 0, "invariant_slack": 0.0,
    }
    n_steps = int(round(scn.duration / scn.dt))
    for _ in range(n_steps):
        centers_now = ex.current_centers()
        for sc in scripts:
            sc.update(ex.t, scn.dt, centers_now)
        obstacles = [sc.obstacle() for sc in scripts]
        st = ex.step(obstacles)
        if keep_states or csv_path:
            states.append(st)
        summary["steps"] += 1
        summary["min_dist"] = min(summary["min_dist"], st.min_dist)
        if st.stopped:
            summary["min_distance_at_stop"] = min(summary["min_distance_at_stop"],
                                                  st.min_dist)
        if st.min_dist <= scn.d_protective:
            summary["contacts"] += 1
            if st.contact_class == CONTACT_VIOLATION:
                summary["violations"] += 1
        if st.arrived:
            summary["arrived"] = True
            summary["arrival_time"] = st.t
            break
    summary["lp_fallbacks"] = ex.n_lp_fallbacks
    summary["invariant_slack"] = ex.invariant_slack
    if csv_path:
        write_log_csv(csv_path, states, world.grid.dof)
    return (summary, states) if keep_states else (summary, [])


def _run_baseline(scn, world, scripts, csv_path):
    base = Baseline(grid=world.grid, constraints=world.constraints,
                    d_protective=scn.d_protective)
    radii = world.robot.sphere_radii
    summary = {"arrival_time": None, "violations": 0,
               "min_distance_at_stop": np.inf, "arrived": False,
               "min_dist": np.inf, "contacts": 0, "steps": 0}
    rows = []
    n_steps = int(round(scn.duration / scn.dt))
    for _ in range(n_steps):
        centers_now = _interp_centers(world, base.s)
        for sc in scripts:
            sc.update(base.t, scn.dt, centers_now)
        obstacles = [sc.obstacle() for sc in scripts]
        d_now, v_obs = np.inf, 0.0
        for ob in obstacles:
            diff = centers_now - ob.position
            d = np.sqrt(np.einsum("sk,sk->s", diff, diff)) - radii
            d_now = min(d_now, max(float(np.min(d)) - ob.radius, 0.0))
            v_obs = max(v_obs, ob.v_max)
        was_arrived = base.arrived
        base.step(scn.dt, d_now, v_obs)
        rows.append((base.t, base.i, base.s, base.v, d_now))
        summary["steps"] += 1
        summary["min_dist"] = min(summary["min_dist"], d_now)
        if base.v <= STOPPED_EPS:
            summary["min_distance_at_stop"] = min(summary["min_distance_at_stop"], d_now)
        if d_now <= scn.d_protective:
            summary["contacts"] += 1
            if base.v > STOPPED_EPS:
                summary["violations"] += 1
        if base.arrived and not was_arrived:
            summary["arrived"] = True
            summary["arrival_time"] = base.t
            break
    if csv_path:
        with open(csv_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "stage", "s", "sdot", "min_dist"])
            w.writerows(rows)
    return summary, rows


def run_race(scn=None, csv_dir=None):
    """Shared-wall drag race: tracking controller vs reactive baseline.

    One wall serves both lanes; it stops at whichever body it touches
    first, dwells, then retreats home.  Returns a summary with both
    arrival times, contact accounting, and the baseline's closest
    approach.
    """
    scn = scn or Scenario(world="car1d", duration=10.0, dt=0.004, M=50, N=50)
    if scn.world != "car1d":
        raise ValueError("run_race needs a car1d scenario")
    scn.robot = {"kind": "point"}
    world = build_world(scn)
    ex = world.executor
    base = Baseline(grid=world.grid, constraints=world.constraints,
                    d_protective=scn.d_protective)
    wall = WallScript("wall", scn.wall.get("home", 30.0), scn.wall.get("v_max", 20.0),
                      scn.wall.get("dwell", 1.0))
    states, base_rows = [], []
    summary = {
        "arrival_time": None, "arrival_time_baseline": None,
        "contact_speed_max": 0.0, "contacts": 0, "violations": 0,
        "baseline_min_dist": np.inf, "min_dist": np.inf, "steps": 0,
    }
    n_steps = int(round(scn.duration / scn.dt))
    for _ in range(n_steps):
        # The wall chases the lane closest to it: both bodies share its axis.
        fronts = np.array([[ex.s, 0.0, 0.0], [base.s, 0.0, 0.0]])
        wall.update(ex.t, scn.dt, fronts)
        ob = wall.obstacle()
        st = ex.step([ob])
        states.append(st)
        base.step(scn.dt, ob.position[0] - ob.radius - base.s, ob.v_max)
        base_rows.append((base.t, base.s, base.v, ob.position[0]))
        summary["steps"] += 1
        summary["min_dist"] = min(summary["min_dist"], st.min_dist)
        summary["baseline_min_dist"] = min(summary["baseline_min_dist"],
                                           ob.position[0] - ob.radius - base.s)
        if st.min_dist <= scn.d_protective:
            summary["contacts"] += 1
            summary["contact_speed_max"] = max(summary["contact_speed_max"], st.sdot)
            if st.contact_class == CONTACT_VIOLATION:
                summary["violations"] += 1
        if summary["arrival_time"] is None and st.arrived:
            summary["arrival_time"] = st.t
        if summary["arrival_time_baseline"] is None and base.arrived:
            summary["arrival_time_baseline"] = base.t
        if summary["arrival_time"] is not None and summary["arrival_time_baseline"] is not None:
            break
    if csv_dir:
        write_log_csv(f"{csv_dir}/race_tracking.csv", states, world.grid.dof)
        with open(f"{csv_dir}/race_baseline.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "s", "sdot", "wall_x"])
            w.writerows(base_rows)
    return summary, states, base_rows
