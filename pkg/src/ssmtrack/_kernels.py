"""Hot numeric kernels, numba-jitted with pure-numpy fallbacks.

Backend selection via the SSMTRACK_BACKEND environment variable:
"auto" (default) picks numba when importable, "numba" requires it,
"numpy" forces the fallback path and skips the numba import entirely.

Every kernel here is a pure function of its array arguments.  The
numba and numpy variants of each kernel produce bitwise-identical
results (reductions run in the same order, fastmath stays off), which
the test suite asserts.
"""

import os

import numpy as np

# Sentinel bound for the branch-free LP reductions.  Using a large
# finite value instead of inf keeps 0*BIG out of nan territory in the
# select arithmetic; anything >= _BIG maps back to inf at the end.
_BIG = 1e300

_requested = os.environ.get("SSMTRACK_BACKEND", "auto").lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"SSMTRACK_BACKEND must be auto|numba|numpy, got {_requested!r}")

HAVE_NUMBA = False
if _requested != "numpy":
    try:
        import warnings

        import numba
        from numba import njit, prange

        # numba probes TBB first and warns when the system copy is too
        # old; it then falls back to another threading layer anyway.
        warnings.filterwarnings("ignore", message=".*TBB.*")
        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise RuntimeError("SSMTRACK_BACKEND=numba but numba is not importable")

USE_NUMBA = HAVE_NUMBA


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n):
    """Clamp and apply the worker-thread count for the numba kernels.

    Returns the thread count actually in effect.  The numpy fallback is
    single-threaded; the request is recorded but has no effect there.
    """
    if not USE_NUMBA:
        return 1
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def get_threads():
    return numba.get_num_threads() if USE_NUMBA else 1


# ---------------------------------------------------------------------------
# Batched 1-D LP:  per problem p, maximize u subject to a_r * u <= b_r.
# beta = min over a>0 of b/a, alpha = max over a<0 of b/a; feasible iff
# alpha <= beta, optimum u* = beta.
# ---------------------------------------------------------------------------

def lp1_batch_numpy(a, b, offsets):
    n_prob = len(offsets) - 1
    if len(a) == 0:
        return np.ones(n_prob, dtype=bool), np.full(n_prob, np.inf)
    ratio = b / a
    pos = a > 0.0
    beta_vals = np.where(pos, ratio, _BIG)
    alpha_vals = np.where(pos, -_BIG, ratio)
    starts = offsets[:-1]
    nonempty = offsets[1:] > starts
    safe = np.minimum(starts, len(a) - 1)
    beta = np.minimum.reduceat(beta_vals, safe)
    alpha = np.maximum.reduceat(alpha_vals, safe)
    beta = np.where(nonempty, beta, _BIG)
    alpha = np.where(nonempty, alpha, -_BIG)
    feasible = alpha <= beta
    u_star = np.where(beta >= _BIG, np.inf, beta)
    return feasible, u_star


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _lp1_batch_numba(a, b, offsets):
        n_prob = offsets.shape[0] - 1
        feasible = np.empty(n_prob, dtype=np.bool_)
        u_star = np.empty(n_prob, dtype=np.float64)
        for p in prange(n_prob):
            alpha = -_BIG
            beta = _BIG
            for r in range(offsets[p], offsets[p + 1]):
                ratio = b[r] / a[r]
                w = 1.0 * (a[r] > 0.0)
                beta = min(beta, w * ratio + (1.0 - w) * _BIG)
                alpha = max(alpha, (1.0 - w) * ratio - w * _BIG)
            feasible[p] = alpha <= beta
            u_star[p] = np.inf if beta >= _BIG else beta
        return feasible, u_star

    def lp1_batch_numba(a, b, offsets):
        return _lp1_batch_numba(
            np.ascontiguousarray(a, dtype=np.float64),
            np.ascontiguousarray(b, dtype=np.float64),
            np.ascontiguousarray(offsets, dtype=np.int64),
        )

else:
    lp1_batch_numba = None


def lp1_batch(a, b, offsets):
    """Dispatch to the active backend."""
    if USE_NUMBA:
        return lp1_batch_numba(a, b, offsets)
    return lp1_batch_numpy(np.asarray(a, float), np.asarray(b, float), np.asarray(offsets))


# ---------------------------------------------------------------------------
# Stoppable-set backward sweep.
#
# K has shape (N+1, N+1, 2); K[j, i] = [x_lo, x_hi] is the interval of
# squared velocities at stage i from which a stop exactly at stage j is
# reachable.  Empty intervals are stored as [inf, -inf].  The wrapper
# seeds K[j, j] = [0, 0] and the sweep fills i = N-1 .. 0, computing
# each K[j, i] from K[j, i+1] by eliminating u from
#
#     rows:    a*u + b*x + c <= 0          (a != 0)
#     bridge:  lo <= x + 2*delta*u <= hi
#     box:     0 <= x <= x_max
#
# via pairwise (lower-bound, upper-bound) combination, which is exact.
# ---------------------------------------------------------------------------

def _stage_row_split(a, b, c):
    """Affine u-bounds per row: u <= pu - qu*x for a>0, u >= pl - ql*x for a<0."""
    pos = a > 0.0
    pu, qu = -c[pos] / a[pos], b[pos] / a[pos]
    neg = ~pos
    pl, ql = -c[neg] / a[neg], b[neg] / a[neg]
    return pl, ql, pu, qu


def _stage_feasible_x(pl, ql, pu, qu, x_max):
    """Interval of x where the stage's own rows admit any u at all."""
    xlo, xhi = 0.0, x_max
    for l in range(len(pl)):
        for m in range(len(pu)):
            kap = qu[m] - ql[l]
            rhs = pu[m] - pl[l]
            if kap > 0.0:
                xhi = min(xhi, rhs / kap)
            elif kap < 0.0:
                xlo = max(xlo, rhs / kap)
            elif rhs < 0.0:
                return 1.0, -1.0
    return xlo, xhi


def project_interval(pl, ql, pu, qu, x_max, two_delta, lo, hi, xlo0=None, xhi0=None):
    """One-step set for a single (stage, bridge) pair; returns (xlo, xhi).

    xlo > xhi signals empty.  xlo0/xhi0 carry the precomputed
    rows-only interval when the caller sweeps many bridges per stage.
    """
    if lo > hi:
        return 1.0, -1.0
    if xlo0 is None:
        xlo0, xhi0 = _stage_feasible_x(pl, ql, pu, qu, x_max)
    xlo, xhi = xlo0, xhi0
    for l in range(len(pl)):
        kap = 1.0 - two_delta * ql[l]
        rhs = hi - two_delta * pl[l]
        if kap > 0.0:
            xhi = min(xhi, rhs / kap)
        elif kap < 0.0:
            xlo = max(xlo, rhs / kap)
        elif rhs < 0.0:
            return 1.0, -1.0
    for m in range(len(pu)):
        kap = two_delta * qu[m] - 1.0
        rhs = two_delta * pu[m] - lo
        if kap > 0.0:
            xhi = min(xhi, rhs / kap)
        elif kap < 0.0:
            xlo = max(xlo, rhs / kap)
        elif rhs < 0.0:
            return 1.0, -1.0
    return xlo, xhi


def stoppable_sweep_numpy(a, b, c, row_off, x_max, deltas, K):
    n_seg = len(deltas)
    for i in range(n_seg - 1, -1, -1):
        sl = slice(row_off[i], row_off[i + 1])
        pl, ql, pu, qu = _stage_row_split(a[sl], b[sl], c[sl])
        xlo0, xhi0 = _stage_feasible_x(pl, ql, pu, qu, x_max[i])
        two_delta = 2.0 * deltas[i]
        lo = K[i + 1:, i + 1, 0].copy()
        hi = K[i + 1:, i + 1, 1].copy()
        xlo = np.full(len(lo), xlo0)
        xhi = np.full(len(lo), xhi0)
        for l in range(len(pl)):
            kap = 1.0 - two_delta * ql[l]
            rhs = hi - two_delta * pl[l]
            if kap > 0.0:
                np.minimum(xhi, rhs / kap, out=xhi)
            elif kap < 0.0:
                np.maximum(xlo, rhs / kap, out=xlo)
            else:
                xlo = np.where(rhs < 0.0, 1.0, xlo)
                xhi = np.where(rhs < 0.0, -1.0, xhi)
        for m in range(len(pu)):
            kap = two_delta * qu[m] - 1.0
            rhs = two_delta * pu[m] - lo
            if kap > 0.0:
                np.minimum(xhi, rhs / kap, out=xhi)
            elif kap < 0.0:
                np.maximum(xlo, rhs / kap, out=xlo)
            else:
                xlo = np.where(rhs < 0.0, 1.0, xlo)
                xhi = np.where(rhs < 0.0, -1.0, xhi)
        empty = (lo > hi) | (xlo > xhi)
        K[i + 1:, i, 0] = np.where(empty, np.inf, xlo)
        K[i + 1:, i, 1] = np.where(empty, -np.inf, xhi)


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def stoppable_sweep_numba(a, b, c, row_off, x_max, deltas, K):
        n_seg = len(deltas)
        n_rows_max = 0
        for i in range(n_seg + 1):
            n_rows_max = max(n_rows_max, row_off[i + 1] - row_off[i])
        pl = np.empty(n_rows_max)
        ql = np.empty(n_rows_max)
        pu = np.empty(n_rows_max)
        qu = np.empty(n_rows_max)
        for i in range(n_seg - 1, -1, -1):
            nl = 0
            nu = 0
            for r in range(row_off[i], row_off[i + 1]):
                if a[r] > 0.0:
                    pu[nu] = -c[r] / a[r]
                    qu[nu] = b[r] / a[r]
                    nu += 1
                else:
                    pl[nl] = -c[r] / a[r]
                    ql[nl] = b[r] / a[r]
                    nl += 1
            xlo0 = 0.0
            xhi0 = x_max[i]
            for l in range(nl):
                for m in range(nu):
                    kap = qu[m] - ql[l]
                    rhs = pu[m] - pl[l]
                    if kap > 0.0:
                        xhi0 = min(xhi0, rhs / kap)
                    elif kap < 0.0:
                        xlo0 = max(xlo0, rhs / kap)
                    elif rhs < 0.0:
                        xlo0 = 1.0
                        xhi0 = -1.0
            two_delta = 2.0 * deltas[i]
            for jj in prange(n_seg - i):
                j = i + 1 + jj
                lo = K[j, i + 1, 0]
                hi = K[j, i + 1, 1]
                if lo > hi:
                    K[j, i, 0] = np.inf
                    K[j, i, 1] = -np.inf
                    continue
                xlo = xlo0
                xhi = xhi0
                for l in range(nl):
                    kap = 1.0 - two_delta * ql[l]
                    rhs = hi - two_delta * pl[l]
                    if kap > 0.0:
                        xhi = min(xhi, rhs / kap)
                    elif kap < 0.0:
                        xlo = max(xlo, rhs / kap)
                    elif rhs < 0.0:
                        xlo = 1.0
                        xhi = -1.0
                for m in range(nu):
                    kap = two_delta * qu[m] - 1.0
                    rhs = two_delta * pu[m] - lo
                    if kap > 0.0:
                        xhi = min(xhi, rhs / kap)
                    elif kap < 0.0:
                        xlo = max(xlo, rhs / kap)
                    elif rhs < 0.0:
                        xlo = 1.0
                        xhi = -1.0
                if xlo > xhi:
                    K[j, i, 0] = np.inf
                    K[j, i, 1] = -np.inf
                else:
                    K[j, i, 0] = xlo
                    K[j, i, 1] = xhi

else:
    stoppable_sweep_numba = None


def stoppable_sweep(a, b, c, row_off, x_max, deltas, K):
    if USE_NUMBA:
        stoppable_sweep_numba(a, b, c, row_off, x_max, deltas, K)
    else:
        stoppable_sweep_numpy(a, b, c, row_off, x_max, deltas, K)


# ---------------------------------------------------------------------------
# Farthest-stop selection: largest j in [i, N] whose traced stopping
# route satisfies the per-stage arrival-time bound.  Worst case O(N^2).
# ---------------------------------------------------------------------------

def _select_stop_py(tau, rho, band, psi, K, x, i, k, committed_j, stop_psi_throughout):
    n_last = tau.shape[0] - 1
    for j in range(n_last, i - 1, -1):
        if k < band[j, i, 0] or k > band[j, i, 1]:
            continue
        # Moving to an earlier stop shrinks the stoppable set; the grid
        # index alone under-reports the true speed by up to one cell, so
        # demand the continuous state actually lie inside it.
        if j < committed_j and not (K[j, i, 0] <= x <= K[j, i, 1]):
            continue
        t_total = tau[j, i, k]
        if not np.isfinite(t_total):
            continue
        ok = True
        l = i
        m = k
        while True:
            bound = psi[j] if stop_psi_throughout else psi[l]
            if not (t_total - tau[j, l, m] < bound):
                ok = False
                break
            if l == j:
                break
            m = rho[j, l, m]
            if m < 0:
                ok = False
                break
            l += 1
        if ok:
            return j
    return committed_j


if HAVE_NUMBA:
    select_stop_numba = njit(cache=True)(_select_stop_py)
else:
    select_stop_numba = None

select_stop_numpy = _select_stop_py


def select_stop(tau, rho, band, psi, K, x, i, k, committed_j, stop_psi_throughout):
    if USE_NUMBA:
        return int(select_stop_numba(tau, rho, band, psi, K, x, i, k,
                                     committed_j, stop_psi_throughout))
    return int(select_stop_numpy(tau, rho, band, psi, K, x, i, k,
                                 committed_j, stop_psi_throughout))


def warmup():
    """Trigger JIT compilation of all numba kernels on tiny inputs."""
    if not USE_NUMBA:
        return
    a = np.array([1.0, -1.0])
    b = np.array([1.0, 1.0])
    lp1_batch_numba(a, b, np.array([0, 2]))
    K = np.full((2, 2, 2), np.inf)
    K[:, :, 1] = -np.inf
    K[1, 1] = 0.0
    K[0, 0] = 0.0
    stoppable_sweep_numba(a, b, -np.ones(2), np.array([0, 2, 2]), np.full(2, 1e6),
                          np.ones(1), K)
    tau = np.zeros((2, 2, 2))
    rho = np.zeros((2, 2, 2), dtype=np.int64)
    band = np.zeros((2, 2, 2), dtype=np.int64)
    select_stop_numba(tau, rho, band, np.full(2, np.inf), K, 0.0, 0, 0, 0, False)
