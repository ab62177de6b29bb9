"""Stoppable sets and the time-to-reach dynamic program.

The backward-reachability layer answers two questions ahead of time:

* From which squared velocities x at stage i can the robot still brake
  to a full stop exactly at stage j?  (the stoppable set K[j][i])
* Starting at stage i with velocity index k, how long does the
  time-optimal braking profile into a stop at j take, and through which
  velocity indices does it pass?  (tables tau / rho)

Both are pure functions of the discretized path and its constraint
stages, so the executor's control cycle reduces to table lookups plus
one scalar LP.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .constraints import StageConstraint, build_constraints
from .lp import Lp1Batch, solve_1d_batch

# Shared rounding slop for velocity-index computations.  floor/ceil on
# sqrt(x)/delta_v would otherwise misround values that land exactly on
# a grid line; every index computation in the package uses this same
# epsilon so bands, successors, and runtime lookups stay consistent.
EPS_IDX = 1e-9

# Feasibility clamp for in-band cells: a grid velocity can sit a few
# ulp outside its stoppable interval, making the cell LP infeasible by
# a margin that is pure roundoff.  Margins up to REL_TOL * max(1, |u*|)
# are forgiven; anything larger marks the cell unreachable.
REL_TOL = 1e-9


@dataclass
class StoppableSetFamily:
    """Intervals K[j][i] of stoppable squared velocities.

    K has shape (N+1, N+1, 2); K[j, i] = (x_lo, x_hi) is the set of
    squared path velocities at stage i from which a stop exactly at
    stage j remains reachable.  Empty intervals are (inf, -inf).
    K[j][j] = (0, 0): being stopped at j is the only way to stop at j.
    """

    K: np.ndarray

    @property
    def n_stages(self):
        return self.K.shape[0] - 1

    def interval(self, j, i):
        lo, hi = self.K[j, i]
        if lo > hi:
            return None
        return float(lo), float(hi)

    def contains(self, j, i, x, tol=0.0):
        lo, hi = self.K[j, i]
        return lo - tol <= x <= hi + tol


def _flatten_rows(constraints):
    a = np.concatenate([sc.a for sc in constraints])
    b = np.concatenate([sc.b for sc in constraints])
    c = np.concatenate([sc.c for sc in constraints])
    row_off = np.zeros(len(constraints) + 1, dtype=np.int64)
    np.cumsum([sc.n_rows for sc in constraints], out=row_off[1:])
    x_max = np.array([sc.x_max for sc in constraints])
    return a, b, c, row_off, x_max


def compute_stoppable_sets(constraints, grid):
    """Backward sweep filling the whole K family.

    constraints: one StageConstraint per stage (length N+1).

    The sweep runs i = N-1 .. 0; at each i every K[j][i], j > i, is an
    exact one-step projection of K[j][i+1] and they are all independent
    of each other, so that inner loop is the parallel axis.
    """
    deltas = grid.deltas
    n_seg = len(deltas)
    if len(constraints) != n_seg + 1:
        raise ValueError("need one constraint stage per grid stage")
    K = np.empty((n_seg + 1, n_seg + 1, 2))
    K[:, :, 0] = np.inf
    K[:, :, 1] = -np.inf
    for j in range(n_seg + 1):
        K[j, j] = 0.0
    if n_seg:
        a, b, c, row_off, x_max = _flatten_rows(constraints)
        _kernels.stoppable_sweep(a, b, c, row_off, x_max,
                                 np.asarray(deltas, dtype=float), K)
    return StoppableSetFamily(K=K)


def compute_delta_v(family, M):
    """Velocity grid step: sqrt of the largest stoppable x, over M.

    The K[N] row dominates every other j by nesting, so its sweep-wide
    maximum is the global one.  A zero result means the path admits no
    motion at all (degenerate); callers must handle delta_v == 0.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    hi = family.K[family.n_stages, :, 1]
    top = float(np.max(hi))
    if not np.isfinite(top):
        raise ValueError("stoppable family is empty everywhere")
    return float(np.sqrt(max(top, 0.0))) / M


def velocity_index(v, delta_v):
    """Runtime grid index floor(v/delta_v), with the shared rounding slop."""
    if delta_v <= 0.0:
        return 0
    return int(np.floor(v / delta_v + EPS_IDX))


def _band_edges(lo, hi, delta_v, M):
    l = int(np.ceil(np.sqrt(max(lo, 0.0)) / delta_v - EPS_IDX))
    m = int(np.floor(np.sqrt(max(hi, 0.0)) / delta_v + EPS_IDX))
    return max(l, 0), min(m, M)


@dataclass
class ReachTables:
    """Dense braking-time tables over (stop stage j, stage i, velocity index k).

    tau[j, i, k]: minimal time to brake from velocity index k at stage
    i to a stop at stage j (inf when unreachable).
    rho[j, i, k]: velocity index reached at stage i+1 on that optimal
    profile (-1 when none).
    band[j, i]: (l, m) inclusive index range with (k*delta_v)^2 inside
    K[j][i]; l > m marks an empty band.
    """

    delta_v: float
    M: int
    tau: np.ndarray
    rho: np.ndarray
    band: np.ndarray
    stats: dict = field(default_factory=dict)

    @property
    def n_stages(self):
        return self.tau.shape[0] - 1


def _ragged_arange(widths):
    total = int(widths.sum())
    starts = np.repeat(np.cumsum(widths) - widths, widths)
    return np.arange(total) - starts


def compute_tables(family, constraints, grid, M):
    """Fill tau/rho/band by one backward sweep of batched 1-D LPs.

    For each stage i all (j, k) cells share the stage's constraint
    rows, and cells whose (bridge interval, x_k) coincide share the
    entire LP, so the per-stage work is: group the j's by identical
    bridge interval (nesting makes equal intervals adjacent), solve one
    deduplicated batch, then gather tau through the successor indices.
    """
    deltas = np.asarray(grid.deltas, dtype=float)
    n_seg = len(deltas)
    if family.n_stages != n_seg or len(constraints) != n_seg + 1:
        raise ValueError("family, constraints, and deltas disagree on stage count")
    delta_v = compute_delta_v(family, M)
    shape = (n_seg + 1, n_seg + 1, M + 1)
    tau = np.full(shape, np.inf)
    rho = np.full(shape, -1, dtype=np.int64)
    band = np.empty((n_seg + 1, n_seg + 1, 2), dtype=np.int64)
    band[:, :, 0] = 0
    band[:, :, 1] = -1
    K = family.K
    for j in range(n_seg + 1):
        tau[j, j, 0] = 0.0
        band[j, j] = 0, 0

    if delta_v == 0.0:
        # No stage admits positive velocity: every stoppable interval
        # is {0}, rest-to-rest travel over a segment takes infinite
        # time, and only the trivial k = 0 cells exist.
        for j in range(n_seg + 1):
            for i in range(j):
                if K[j, i, 0] <= K[j, i, 1]:
                    band[j, i] = 0, 0
        return ReachTables(delta_v=0.0, M=M, tau=tau, rho=rho, band=band,
                           stats={"n_cells": 0, "n_lp": 0})

    n_cells_total = 0
    n_lp_total = 0
    for i in range(n_seg - 1, -1, -1):
        js = np.arange(i + 1, n_seg + 1)
        cur_lo, cur_hi = K[js, i, 0], K[js, i, 1]
        nxt_lo, nxt_hi = K[js, i + 1, 0], K[js, i + 1, 1]

        nonempty = cur_lo <= cur_hi
        l_idx = np.zeros(len(js), dtype=np.int64)
        m_idx = np.full(len(js), -1, dtype=np.int64)
        ne = np.flatnonzero(nonempty)
        if len(ne):
            # same arithmetic as _band_edges, elementwise
            l_ne = np.ceil(np.sqrt(np.maximum(cur_lo[ne], 0.0)) / delta_v - EPS_IDX)
            m_ne = np.floor(np.sqrt(np.maximum(cur_hi[ne], 0.0)) / delta_v + EPS_IDX)
            l_idx[ne] = np.maximum(l_ne.astype(np.int64), 0)
            m_idx[ne] = np.minimum(m_ne.astype(np.int64), M)
        band[js, i, 0] = l_idx
        band[js, i, 1] = m_idx

        elig = nonempty & (l_idx <= m_idx) & (nxt_lo <= nxt_hi)
        if not np.any(elig):
            continue
        je = js[elig]
        lo_e, hi_e = nxt_lo[elig], nxt_hi[elig]
        l_e, m_e = l_idx[elig], m_idx[elig]

        # Runs of identical bridge intervals over adjacent j.
        new = np.empty(len(je), dtype=bool)
        new[0] = True
        new[1:] = (lo_e[1:] != lo_e[:-1]) | (hi_e[1:] != hi_e[:-1])
        gid = np.cumsum(new) - 1
        rep = np.flatnonzero(new)
        widths_g = m_e[rep] - l_e[rep] + 1

        # Unique (group, k) problems.
        k_u = np.repeat(l_e[rep], widths_g) + _ragged_arange(widths_g)
        gid_u = np.repeat(np.arange(len(rep)), widths_g)
        x_u = (k_u * delta_v) ** 2
        lo_u = lo_e[rep][gid_u]
        hi_u = hi_e[rep][gid_u]
        n_u = len(k_u)

        sc = constraints[i]
        nr = sc.n_rows
        inv2d = 1.0 / (2.0 * deltas[i])
        A2 = np.empty((n_u, nr + 2))
        B2 = np.empty((n_u, nr + 2))
        A2[:, :nr] = sc.a
        A2[:, nr] = 1.0
        A2[:, nr + 1] = -1.0
        B2[:, :nr] = -sc.c - np.outer(x_u, sc.b)
        B2[:, nr] = (hi_u - x_u) * inv2d
        B2[:, nr + 1] = (x_u - lo_u) * inv2d
        batch = Lp1Batch(a=A2.ravel(), b=B2.ravel(),
                         row_offsets=np.arange(n_u + 1, dtype=np.int64) * (nr + 2),
                         x_fixed=x_u)
        feas, u_star = solve_1d_batch(batch)

        dead = ~np.asarray(feas)
        if np.any(dead):
            # Re-derive the infeasibility margin; forgive pure roundoff.
            ratio = B2[dead] / A2[dead]
            alpha = np.max(np.where(A2[dead] < 0, ratio, -np.inf), axis=1)
            beta = np.min(np.where(A2[dead] > 0, ratio, np.inf), axis=1)
            ok = alpha - beta <= REL_TOL * np.maximum(1.0, np.abs(beta))
            u_star[np.flatnonzero(dead)[ok]] = beta[ok]
            dead[np.flatnonzero(dead)[ok]] = False

        x_star = np.clip(x_u + 2.0 * deltas[i] * u_star, 0.0, None)
        v0 = np.sqrt(x_u)
        v1 = np.sqrt(x_star)
        den = v0 + v1
        t_u = np.where(den > 0.0, 2.0 * deltas[i] / np.where(den > 0.0, den, 1.0), np.inf)
        t_u[dead] = np.inf
        rho_u = np.minimum(np.floor(v1 / delta_v + EPS_IDX).astype(np.int64), M)
        rho_u[dead] = 0

        # Broadcast the unique solutions back over every j in each run.
        w_e = m_e - l_e + 1
        gstart = np.cumsum(widths_g) - widths_g
        uidx = np.repeat(gstart[gid], w_e) + _ragged_arange(w_e)
        j_cell = np.repeat(je, w_e)
        k_cell = np.repeat(l_e, w_e) + _ragged_arange(w_e)
        rho_c = rho_u[uidx]
        t_c = t_u[uidx]
        tau[j_cell, i, k_cell] = tau[j_cell, i + 1, rho_c] + t_c
        rho[j_cell, i, k_cell] = np.where(np.isfinite(t_c), rho_c, -1)

        n_cells_total += len(j_cell)
        n_lp_total += n_u

    return ReachTables(delta_v=delta_v, M=M, tau=tau, rho=rho, band=band,
                       stats={"n_cells": n_cells_total, "n_lp": n_lp_total})


def trace_route(tables, j, i, k):
    """Velocity indices [m_i, ..., m_j] of the stored braking profile.

    m_i = k, each successor is rho[j][l][m_l], and m_j = 0.  Returns
    None when tau[j, i, k] is infinite or the indices are out of range.
    """
    if not (0 <= i <= j <= tables.n_stages):
        return None
    if k < tables.band[j, i, 0] or k > tables.band[j, i, 1]:
        return None
    if not np.isfinite(tables.tau[j, i, k]):
        return None
    route = [int(k)]
    l, m = i, int(k)
    while l < j:
        m = int(tables.rho[j, l, m])
        if m < 0:
            return None
        l += 1
        route.append(m)
    return route


def precompute(grid, limits, M, x_ceiling=None):
    """Full offline pipeline: constraints, stoppable sets, reach tables."""
    kwargs = {} if x_ceiling is None else {"x_ceiling": x_ceiling}
    constraints = build_constraints(grid, limits, **kwargs)
    family = compute_stoppable_sets(constraints, grid)
    tables = compute_tables(family, constraints, grid, M)
    return constraints, family, tables
