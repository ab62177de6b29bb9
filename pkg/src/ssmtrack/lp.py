"""1-D linear programs in the control u, scalar and batched.

Every problem has the form

    maximize u   subject to   a_r * u <= b_r,   a_r != 0

whose solution is closed-form: beta = min over a_r > 0 of b_r / a_r,
alpha = max over a_r < 0 of b_r / a_r, feasible iff alpha <= beta, and
the optimum is u* = beta (+inf when no positive-coefficient row bounds
u from above).  The batched variant runs the same reduction over a flat
CSR-like layout so thousands of problems solve in one call.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import _BIG


def solve_1d(a, b):
    """Scalar reference solver.

    Parameters
    ----------
    a, b: array_like
        Row coefficients, a_r * u <= b_r.  No a_r may be zero.

    Returns
    -------
    (feasible, u_star): (bool, float)
        u_star is +inf when u is unbounded above; it is meaningful only
        when feasible.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError("a and b must be 1-D arrays of equal length")
    if np.any(a == 0.0):
        raise ValueError("zero row coefficient: fold a=0 rows into bounds first")
    alpha = -_BIG
    beta = _BIG
    for r in range(len(a)):
        ratio = b[r] / a[r]
        w = 1.0 * (a[r] > 0.0)
        beta = min(beta, w * ratio + (1.0 - w) * _BIG)
        alpha = max(alpha, (1.0 - w) * ratio - w * _BIG)
    return bool(alpha <= beta), (np.inf if beta >= _BIG else beta)


@dataclass
class Lp1Batch:
    """Flat batch of 1-D LPs.

    a, b hold all rows back to back; problem p owns rows
    row_offsets[p]:row_offsets[p+1].  row_offsets has length
    n_problems + 1, starts at 0, is nondecreasing, and ends at len(a).
    x_fixed optionally records the squared path velocity each problem's
    rows were instantiated at (metadata for callers; the solve ignores
    it).
    """

    a: np.ndarray
    b: np.ndarray
    row_offsets: np.ndarray
    x_fixed: np.ndarray = None

    def __post_init__(self):
        self.a = np.ascontiguousarray(self.a, dtype=np.float64)
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)
        self.row_offsets = np.ascontiguousarray(self.row_offsets, dtype=np.int64)
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("a and b must be 1-D arrays of equal length")
        if (len(self.row_offsets) == 0 or self.row_offsets[0] != 0
                or self.row_offsets[-1] != len(self.a)):
            raise ValueError("row_offsets must start at 0 and end at len(a)")
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if np.any(self.a == 0.0):
            raise ValueError("zero row coefficient in batch")
        if self.x_fixed is not None:
            self.x_fixed = np.ascontiguousarray(self.x_fixed, dtype=np.float64)
            if len(self.x_fixed) != self.n_problems:
                raise ValueError("x_fixed must have one entry per problem")

    @property
    def n_problems(self):
        return len(self.row_offsets) - 1


def solve_1d_batch(batch):
    """Solve every problem in the batch with the active backend.

    Returns (feasible, u_star) arrays of length batch.n_problems.
    Bitwise-identical to running solve_1d per problem.
    """
    return _kernels.lp1_batch(batch.a, batch.b, batch.row_offsets)


def solve_2d_project_x(a, b, c, x_max, delta, lo, hi):
    """Exact projection onto x of the one-step feasibility system.

    The system couples a control u and a squared velocity x:

        a_r * u + b_r * x + c_r <= 0    (a_r != 0)
        0 <= x <= x_max
        lo <= x + 2*delta*u <= hi

    u is eliminated by combining every lower bound on u with every
    upper bound (O(m^2) pairs, exact arithmetic, no tolerance).

    Returns (x_lo, x_hi), or None when the projection is empty.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(a == 0.0):
        raise ValueError("zero row coefficient: fold a=0 rows into bounds first")
    pl, ql, pu, qu = _kernels._stage_row_split(a, b, c)
    xlo, xhi = _kernels.project_interval(pl, ql, pu, qu, float(x_max),
                                         2.0 * float(delta), float(lo), float(hi))
    if xlo > xhi:
        return None
    return float(xlo), float(xhi)
