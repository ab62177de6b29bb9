"""Joint-space paths and their discretization into stages.

A path is a piecewise-C2 spline q(s) over the scalar path parameter s.
The tracking algorithm only ever sees the discretized form: stage
positions s_i, gaps, and the first/second path derivatives sampled at
each stage.
"""

import json

import numpy as np
from dataclasses import dataclass
from scipy.interpolate import CubicSpline, PPoly


@dataclass
class JointPath:
    """Geometric path q(s), s in [0, s_end], piecewise C2 per joint.

    Attributes
    ----------
    waypoints : ndarray, shape (W, dof)
        Configurations the spline interpolates.
    pp : PPoly
        Vector-valued piecewise polynomial over [0, s_end].
    s_end : float
        Path-parameter length.
    """

    waypoints: np.ndarray
    pp: PPoly
    s_end: float

    def __post_init__(self):
        self._d1 = self.pp.derivative()
        self._d2 = self._d1.derivative()

    @property
    def dof(self):
        return self.waypoints.shape[1]

    def eval(self, s):
        return self.pp(s)

    def evald(self, s):
        return self._d1(s)

    def evaldd(self, s):
        return self._d2(s)


@dataclass
class PathGrid:
    """Uniform-per-segment discretization of a path into N+1 stages.

    q, qp, qpp have shape (N+1, dof); stages and deltas are (N+1,) and
    (N,).  deltas[i] = stages[i+1] - stages[i] > 0.
    """

    stages: np.ndarray
    deltas: np.ndarray
    q: np.ndarray
    qp: np.ndarray
    qpp: np.ndarray

    @property
    def n_segments(self):
        return len(self.deltas)

    @property
    def dof(self):
        return self.q.shape[1]


def build_spline(waypoints) -> JointPath:
    """Fit a clamped cubic spline through the waypoints.

    Unit-chord parameterization: each waypoint pair spans 1.0 in s, so
    s_end equals the number of segments.  Both spline ends have zero
    first derivative (the robot starts and ends at rest).

    Raises
    ------
    ValueError
        Fewer than 2 waypoints, or inconsistent joint dimensions.
    """
    wp = np.asarray(waypoints, dtype=float)
    if wp.ndim == 1:
        wp = wp[:, None]
    if wp.ndim != 2 or wp.shape[0] < 2:
        raise ValueError("need at least 2 waypoints of equal dimension")
    n_seg = wp.shape[0] - 1
    knots = np.arange(n_seg + 1, dtype=float)
    if np.allclose(wp, wp[0]):
        # Degenerate constant path: CubicSpline handles it, but build the
        # constant PPoly explicitly to keep derivatives exactly zero.
        c = np.zeros((4, n_seg, wp.shape[1]))
        c[3] = wp[0]
        pp = PPoly(c, knots)
    else:
        pp = CubicSpline(knots, wp, bc_type="clamped")
    return JointPath(waypoints=wp, pp=pp, s_end=float(knots[-1]))


def line_path(start, end, length=None) -> JointPath:
    """Straight path from start to end, parameterized by arc length.

    Used by worlds where s should carry physical units (the 1-D car).
    `length` overrides the Euclidean chord when the configuration-space
    norm is not the right scale.
    """
    a = np.atleast_1d(np.asarray(start, dtype=float))
    b = np.atleast_1d(np.asarray(end, dtype=float))
    if a.shape != b.shape:
        raise ValueError("start/end dimension mismatch")
    L = float(np.linalg.norm(b - a)) if length is None else float(length)
    if L <= 0:
        raise ValueError("line path must have positive length")
    c = np.zeros((2, 1, a.size))
    c[0, 0] = (b - a) / L
    c[1, 0] = a
    pp = PPoly(c, np.array([0.0, L]))
    return JointPath(waypoints=np.stack([a, b]), pp=pp, s_end=L)


def discretize(path: JointPath, n_min: int) -> PathGrid:
    """Grid the path into N >= n_min segments, stages aligned to knots.

    Each knot interval gets ceil(n_min * len / s_end) uniform
    subdivisions, so every spline knot lands exactly on a stage and N
    can exceed n_min.
    """
    if n_min < 1:
        raise ValueError("n_min must be >= 1")
    knots = np.asarray(path.pp.x, dtype=float)
    keep = np.concatenate([[True], np.diff(knots) > 0])
    knots = knots[keep]
    pieces = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        n_k = max(1, int(np.ceil(n_min * (hi - lo) / path.s_end - 1e-12)))
        pieces.append(np.linspace(lo, hi, n_k + 1)[:-1])
    stages = np.concatenate(pieces + [knots[-1:]])
    return PathGrid(
        stages=stages,
        deltas=np.diff(stages),
        q=_as_2d(path.eval(stages)),
        qp=_as_2d(path.evald(stages)),
        qpp=_as_2d(path.evaldd(stages)),
    )


def _as_2d(arr):
    arr = np.asarray(arr, dtype=float)
    return arr if arr.ndim == 2 else arr[:, None]


def load_waypoints_json(fp) -> np.ndarray:
    """Read {"waypoints": [[rad, ...], ...]} from a path or file object."""
    if hasattr(fp, "read"):
        obj = json.load(fp)
    else:
        with open(fp) as f:
            obj = json.load(f)
    return np.asarray(obj["waypoints"], dtype=float)


def grid_to_csv(grid: PathGrid, fp):
    """Write the grid as CSV: s, delta, then q/qp/qpp per joint."""
    dof = grid.dof
    cols = ["s", "delta"]
    for name in ("q", "qp", "qpp"):
        cols += [f"{name}{j}" for j in range(dof)]
    deltas = np.concatenate([grid.deltas, [0.0]])
    rows = np.column_stack([grid.stages, deltas, grid.q, grid.qp, grid.qpp])
    own = not hasattr(fp, "write")
    f = open(fp, "w") if own else fp
    try:
        f.write(",".join(cols) + "\n")
        np.savetxt(f, rows, delimiter=",", fmt="%.12g")
    finally:
        if own:
            f.close()
