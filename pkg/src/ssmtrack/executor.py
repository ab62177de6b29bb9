"""Run-time tracking controller with a committed stopping stage.

Each control cycle does four things:

1. sense: per-stage clearances to every obstacle become the vector
   psi[l], the earliest time any obstacle could touch the robot's
   swept volume at stage l.
2. select: pick the farthest stop stage j whose stored braking profile
   arrives at every stage on its route strictly before an obstacle
   could (falling back to the previously committed stage, which stays
   reachable by construction).
3. commit + act: one scalar LP gives the largest path acceleration u
   that keeps the next stage's squared velocity inside the committed
   stoppable interval.
4. integrate: advance (s, sdot) exactly under piecewise-constant u,
   re-solving the LP at each stage boundary crossed inside the cycle
   so the commitment invariant x in K[j][i] holds at every stage, not
   just at cycle edges.

The invariant gives the safety guarantee its shape: whatever the
obstacles do from now on, the robot can reach a full stop at stage
committed_j, and it will already be stopped there by the time any
obstacle can first touch it.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lp import solve_1d
from .reach import REL_TOL, velocity_index
from .robots import min_distances

# A robot is "stopped" below this path speed; breaching the protective
# distance above it is a violation.
STOPPED_EPS = 1e-9

CONTACT_NONE = "none"
CONTACT_SAFE = "safe"
CONTACT_VIOLATION = "violation"


@dataclass
class ObstacleInfo:
    """Sensed obstacle sphere: position, radius, declared speed bound."""

    id: str
    position: np.ndarray
    v_max: float
    radius: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        if not self.v_max > 0.0:
            raise ValueError("obstacle v_max must be strictly positive")
        if self.radius < 0.0:
            raise ValueError("obstacle radius must be >= 0")


@dataclass
class DistanceField:
    """Clearance matrix d[l][q]: robot posed at stage l vs obstacle q.

    Entries are clamped at 0 (contact), never negative.
    """

    d: np.ndarray

    @property
    def per_stage(self):
        """min over obstacles, shape (N+1,); inf when no obstacles."""
        if self.d.shape[1] == 0:
            return np.full(self.d.shape[0], np.inf)
        return np.min(self.d, axis=1)


def compute_distance_field(centers, radii, obstacles):
    """Distance matrix over precomputed per-stage sphere centers."""
    d = np.empty((centers.shape[0], len(obstacles)))
    for q, ob in enumerate(obstacles):
        d[:, q] = min_distances(centers, radii, ob.position, ob.radius)
    return DistanceField(d=d)


def time_to_arrive(dist_field, d_protective, obstacles):
    """psi[l] = min over q of (d[l][q] - d_protective) / v_max_q.

    Negative where an obstacle already breaches the protective distance
    of stage l's pose; +inf with no obstacles.  Negative values are
    kept: they make the selection's strict comparison fail, as they
    must.
    """
    n = dist_field.d.shape[0]
    psi = np.full(n, np.inf)
    for q, ob in enumerate(obstacles):
        np.minimum(psi, (dist_field.d[:, q] - d_protective) / ob.v_max, out=psi)
    return psi


def select_stop_stage(tables, family, i, k, x, committed_j, psi,
                      stop_psi_throughout=False):
    """Farthest stage j in [i, N] whose braking route beats every psi bound.

    For each candidate j (largest first) the stored route from (i, k)
    is traced; j qualifies when the arrival time at every route stage l,
    tau[j][i][k] - tau[j][l][m_l], is strictly below psi[l] (or psi[j]
    throughout, with stop_psi_throughout).  Moving below committed_j
    additionally requires the continuous x inside the candidate's
    stoppable interval.  Falls back to committed_j, which stays
    executable by the commitment invariant.
    """
    return _kernels.select_stop(tables.tau, tables.rho, tables.band,
                                np.ascontiguousarray(psi, dtype=np.float64),
                                family.K, float(x), int(i), int(k),
                                int(committed_j), bool(stop_psi_throughout))


@dataclass
class ExecutorState:
    """Snapshot at the end of a control cycle (one log row)."""

    t: float
    stage: int
    s: float
    sdot: float
    j_stop: int
    u: float
    min_dist: float
    psi_min: float
    contact_class: str
    arrived: bool
    q: np.ndarray
    qdot: np.ndarray
    qddot: np.ndarray

    @property
    def x(self):
        return self.sdot * self.sdot

    @property
    def stopped(self):
        return abs(self.sdot) <= STOPPED_EPS


class SafeExecutor:
    """Tracks a discretized path while honoring stop commitments."""

    def __init__(self, grid, constraints, family, tables, centers, radii,
                 d_protective=0.0, dt=0.004, stop_psi_throughout=False):
        self.grid = grid
        self.constraints = constraints
        self.family = family
        self.tables = tables
        self.centers = centers
        self.radii = np.asarray(radii, dtype=float)
        self.d_protective = float(d_protective)
        self.dt = float(dt)
        self.stop_psi_throughout = bool(stop_psi_throughout)
        self.n = grid.n_segments
        self.reset()

    def reset(self):
        self.t = 0.0
        self.s = 0.0
        self.v = 0.0
        self.i = 0
        self.committed_j = 0
        self.u_last = 0.0
        self.n_lp_fallbacks = 0
        self.invariant_slack = 0.0
        self.arrived = self.n == 0

    # -- cycle ------------------------------------------------------------

    def snapshot(self, obstacles):
        """Current state without advancing time."""
        dist_field = compute_distance_field(self.centers, self.radii, obstacles)
        psi = time_to_arrive(dist_field, self.d_protective, obstacles)
        return self._snapshot(obstacles, psi)

    def step(self, obstacles):
        """One control cycle of length dt; returns the end-of-cycle state."""
        dist_field = compute_distance_field(self.centers, self.radii, obstacles)
        psi = time_to_arrive(dist_field, self.d_protective, obstacles)
        self.step_control(psi)
        return self._snapshot(obstacles, psi)

    def step_control(self, psi):
        """One cycle from a precomputed reach-time profile.

        Commits a stop stage, applies the greedy forward control over
        dt, and returns (u, joint velocity command).  Sensing-free
        entry point: callers that already hold psi (or fabricate it)
        use this directly.
        """
        psi = np.ascontiguousarray(psi, dtype=np.float64)
        self._select(psi)
        self._advance(self.dt)
        self.t += self.dt
        return self.u_last, self._interp(self.grid.qp) * self.v

    def _select(self, psi):
        if self.i >= self.n:
            self.committed_j = self.n
            return
        tab = self.tables
        x = self.v * self.v
        k = velocity_index(self.v, tab.delta_v)
        b_lo, b_hi = tab.band[self.committed_j, self.i]
        if b_lo <= b_hi:
            k = min(max(k, b_lo), b_hi)
        j = select_stop_stage(tab, self.family, self.i, k, x, self.committed_j,
                              psi, self.stop_psi_throughout)
        if j < self.committed_j:
            # A drop is only taken when the state can still steer into
            # the tighter set over the distance actually left in the
            # segment; otherwise ride out the commitment we hold.
            # j == i passes without a probe: the selection's membership
            # gate already proved the state is at rest on this stage.
            if j > self.i:
                ds = float(self.grid.stages[self.i + 1]) - self.s
                if not (ds > 0.0 and self._steer(self.i, x, ds, j)[0]):
                    j = self.committed_j
        self.committed_j = j

    # -- greedy forward control ------------------------------------------

    def _steer(self, i, x, ds, j):
        """(ok, u): largest u steering x into K[j][i+1] over remaining ds.

        ok covers exact feasibility plus the same relative forgiveness
        the table build applies to cells pinched by roundoff.
        """
        sc = self.constraints[i]
        lo, hi = self.family.K[j, i + 1]
        inv2d = 1.0 / (2.0 * ds)
        a = np.concatenate([sc.a, [1.0, -1.0]])
        b = np.concatenate([-(sc.b * x + sc.c), [(hi - x) * inv2d, (x - lo) * inv2d]])
        feasible, u = solve_1d(a, b)
        if not feasible:
            neg = a < 0.0
            alpha = float(np.max(b[neg] / a[neg]))
            feasible = alpha - u <= REL_TOL * max(1.0, abs(u))
        return feasible, u

    def _forward_u(self, i, x, ds, u_prev):
        """Largest admissible u keeping the next stage inside the committed set."""
        j = self.committed_j
        if i >= self.n or j <= i:
            return 0.0
        lo, hi = self.family.K[j, i + 1]
        if lo > hi:
            return 0.0
        ok, u = self._steer(i, x, ds, j)
        if not ok:
            # Mid-segment rows can pinch tighter than the certificate
            # issued at the stage boundary.  The control chosen there
            # still lands inside the committed set, so keep flying it
            # and count the event.
            self.n_lp_fallbacks += 1
            return u_prev
        return u

    # -- exact piecewise integration --------------------------------------

    @staticmethod
    def _time_to_cross(v, u, ds):
        if ds <= 0.0:
            return 0.0
        if u == 0.0:
            return ds / v if v > 0.0 else np.inf
        disc = v * v + 2.0 * u * ds
        if u < 0.0 and disc <= 0.0:
            return np.inf
        return (np.sqrt(disc) - v) / u

    def _advance(self, dt):
        t_rem = dt
        u = self.u_last
        # 2N+4 bounds the zero-time boundary crossings a cycle can make.
        for _ in range(2 * self.n + 4):
            if t_rem <= 1e-15 or self.i >= self.n:
                break
            x = self.v * self.v
            ds = float(self.grid.stages[self.i + 1]) - self.s
            if ds <= 0.0:
                self._cross(x, 0.0, 0.0)
                continue
            u = self._forward_u(self.i, x, ds, u)
            t_cross = self._time_to_cross(self.v, u, ds)
            t_stop = self.v / -u if u < 0.0 else np.inf
            if t_stop < min(t_cross, t_rem) - 1e-15:
                # Comes to rest inside the segment.
                self.s += 0.5 * self.v * t_stop
                self.v = 0.0
                u = 0.0
                t_rem -= t_stop
                ds = float(self.grid.stages[self.i + 1]) - self.s
                if ds <= 0.0 or self._forward_u(self.i, 0.0, ds, 0.0) <= 0.0:
                    break
                continue
            if t_cross <= t_rem:
                self._cross(x, u, ds)
                t_rem -= t_cross
                continue
            s_new = self.s + self.v * t_rem + 0.5 * u * t_rem * t_rem
            if s_new >= self.grid.stages[self.i + 1]:
                # Integration roundoff stepped over the boundary; land
                # the crossing exactly instead.
                self._cross(x, u, ds)
                break
            self.s = s_new
            self.v = max(self.v + u * t_rem, 0.0)
            t_rem = 0.0
        if self.i >= self.n:
            self.s = float(self.grid.stages[-1])
            self.v = 0.0
            self.arrived = True
            u = 0.0
        self.u_last = u

    def _cross(self, x, u, ds):
        """Land exactly on the next stage, clipped into the committed set."""
        x_new = x + 2.0 * u * ds
        lo, hi = self.family.K[self.committed_j, self.i + 1]
        if lo <= hi:
            self.invariant_slack = max(self.invariant_slack,
                                       lo - x_new, x_new - hi)
            x_new = min(max(x_new, lo), hi)
        self.v = np.sqrt(max(x_new, 0.0))
        self.s = float(self.grid.stages[self.i + 1])
        self.i += 1

    # -- logging ----------------------------------------------------------

    def _interp(self, arr):
        if self.i >= self.n:
            return arr[self.n]
        w = (self.s - self.grid.stages[self.i]) / self.grid.deltas[self.i]
        return (1.0 - w) * arr[self.i] + w * arr[self.i + 1]

    def current_centers(self):
        """Sphere centers at the robot's interpolated configuration."""
        return self._interp(self.centers)

    def _snapshot(self, obstacles, psi):
        centers_now = self.current_centers()
        d_now = np.inf
        for ob in obstacles:
            diff = centers_now - ob.position
            d = np.sqrt(np.einsum("sk,sk->s", diff, diff)) - self.radii
            d_now = min(d_now, max(float(np.min(d)) - ob.radius, 0.0))
        if d_now > self.d_protective:
            contact = CONTACT_NONE
        elif abs(self.v) <= STOPPED_EPS:
            contact = CONTACT_SAFE
        else:
            contact = CONTACT_VIOLATION
        qp = self._interp(self.grid.qp)
        qpp = self._interp(self.grid.qpp)
        return ExecutorState(
            t=self.t, stage=self.i, s=self.s, sdot=self.v,
            j_stop=self.committed_j, u=self.u_last,
            min_dist=d_now, psi_min=float(np.min(psi[self.i:])),
            contact_class=contact, arrived=self.arrived,
            q=self._interp(self.grid.q), qdot=qp * self.v,
            qddot=qpp * self.v * self.v + qp * self.u_last,
        )
