"""Per-stage linearized second-order constraints.

Each stage i carries rows a*u + b*x + c <= 0 over the path acceleration
u and squared path velocity x, plus a direct cap x <= x_max.  Joint
acceleration limits produce the rows; joint velocity limits fold into
x_max.  Rows with a == 0 are always folded into x_max so downstream LP
kernels can divide by a freely.
"""

import numpy as np
from dataclasses import dataclass

from .path import PathGrid

# Cap for stages where no joint moves (all qp == 0); x is otherwise
# unbounded there.
DEGENERATE_X_CEILING = 1e6


@dataclass
class LimitSpec:
    """Per-joint velocity and acceleration limits, all > 0."""

    v_max: np.ndarray
    a_max: np.ndarray

    def __post_init__(self):
        self.v_max = np.atleast_1d(np.asarray(self.v_max, dtype=float))
        self.a_max = np.atleast_1d(np.asarray(self.a_max, dtype=float))
        if self.v_max.shape != self.a_max.shape:
            raise ValueError("v_max and a_max must have equal length")
        for arr, name in ((self.v_max, "v_max"), (self.a_max, "a_max")):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} entries must be finite and > 0")

    @property
    def dof(self):
        return len(self.v_max)


@dataclass
class StageConstraint:
    """Rows (a, b, c) with a != 0, plus the velocity cap x_max >= 0."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    x_max: float

    @property
    def n_rows(self):
        return len(self.a)


def build_constraints(grid: PathGrid, limits: LimitSpec, x_ceiling=DEGENERATE_X_CEILING):
    """Constraint set for every stage of the grid.

    Per joint j the acceleration bound |qp_j*u + qpp_j*x| <= a_max_j
    yields the row pair (+qp_j, +qpp_j, -a_max_j) and its negation; the
    velocity bound folds into x_max = min_j (v_max_j/|qp_j|)^2.  Rows
    whose u coefficient vanishes become x bounds instead.
    """
    if grid.dof != limits.dof:
        raise ValueError("grid and limits dimensions disagree")
    out = []
    for i in range(grid.n_segments + 1):
        qp = grid.qp[i]
        qpp = grid.qpp[i]
        a = np.concatenate([qp, -qp])
        b = np.concatenate([qpp, -qpp])
        c = np.concatenate([-limits.a_max, -limits.a_max])

        x_max = x_ceiling
        moving = np.abs(qp) > 0
        if np.any(moving):
            x_max = min(x_max, np.min((limits.v_max[moving] / np.abs(qp[moving])) ** 2))

        # Fold a == 0 rows: b*x + c <= 0 becomes x <= -c/b for b > 0 and
        # is vacuous for b <= 0 (c = -a_max < 0 always).
        zero_a = a == 0
        for bz, cz in zip(b[zero_a], c[zero_a]):
            if bz > 0:
                x_max = min(x_max, -cz / bz)
        keep = ~zero_a
        out.append(StageConstraint(a=a[keep], b=b[keep], c=c[keep], x_max=float(max(x_max, 0.0))))
    return out


def admissible_u(sc: StageConstraint, x):
    """Interval [u_lo, u_hi] of controls admissible at squared velocity x.

    Returns None when infeasible (including x > x_max).  Either bound
    may be infinite when no row constrains that side.
    """
    if x < 0 or x > sc.x_max:
        return None
    u_lo, u_hi = -np.inf, np.inf
    rhs = -(sc.b * x + sc.c)
    pos = sc.a > 0
    if np.any(pos):
        u_hi = np.min(rhs[pos] / sc.a[pos])
    neg = ~pos
    if np.any(neg):
        u_lo = np.max(rhs[neg] / sc.a[neg])
    if u_lo > u_hi:
        return None
    return (float(u_lo), float(u_hi))
