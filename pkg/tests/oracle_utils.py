"""Shared test fixtures and independent oracles.

The oracles here deliberately avoid the library's own solution paths:
interval scans instead of LPs, graph value iteration instead of the
batched sweep, so agreement is evidence rather than tautology.
"""

import numpy as np

from ssmtrack.constraints import LimitSpec, build_constraints
from ssmtrack.path import build_spline, discretize, line_path


def car_world(n=50, goal=25.0, v_max=20.0, a_max=100.0):
    grid = discretize(line_path(np.zeros(1), np.array([goal])), n)
    lim = LimitSpec(v_max=np.array([v_max]), a_max=np.array([a_max]))
    return grid, lim, build_constraints(grid, lim)


def random_world(rng, dof=None, n=None):
    """Random smooth arm path with random positive limits."""
    dof = dof or int(rng.integers(1, 4))
    n = n or int(rng.integers(20, 101))
    waypoints = np.cumsum(rng.uniform(-1.0, 1.0, size=(rng.integers(3, 7), dof)),
                          axis=0)
    grid = discretize(build_spline(waypoints), n)
    lim = LimitSpec(v_max=rng.uniform(0.5, 4.0, dof), a_max=rng.uniform(2.0, 20.0, dof))
    return grid, lim, build_constraints(grid, lim)


def admissible_u_scan(sc, x, u_lo=None, u_hi=None, n=200001):
    """Brute-force admissible-control interval by scanning candidates.

    The window defaults to twice the largest per-row crossing point so
    a feasible region far from the origin still lands inside it.
    """
    if u_lo is None or u_hi is None:
        span = 1e4
        for a, b, c in zip(sc.a, sc.b, sc.c):
            span = max(span, 2.0 * abs((b * x + c) / a))
        u_lo, u_hi = -span, span
    u = np.linspace(u_lo, u_hi, n)
    ok = np.ones(n, dtype=bool)
    for a, b, c in zip(sc.a, sc.b, sc.c):
        ok &= a * u + b * x + c <= 1e-9
    if not ok.any():
        return None
    return float(u[ok].min()), float(u[ok].max())


def lp_oracle(a, b, grid_pts=400001, lo=-1e3, hi=1e3):
    """Feasibility and max-u by dense candidate scan plus vertex check.

    Vertices of a 1-D LP are the per-row bounds b_r/a_r; the optimum,
    when it exists, sits on one of them, so checking candidates plus
    the row bounds is exact up to evaluation tolerance.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cand = b / a
    lower = cand[a < 0]
    upper = cand[a > 0]
    alpha = lower.max() if lower.size else -np.inf
    beta = upper.min() if upper.size else np.inf
    return bool(alpha <= beta), beta


def _row_interval(sc, x):
    """Raw admissible-control corners by direct row intersection.

    Returned unsorted: alpha can exceed beta when the rows conflict,
    which callers forgive at the library's own roundoff tolerance.
    """
    alpha, beta = -np.inf, np.inf
    for a, b, c in zip(sc.a, sc.b, sc.c):
        bound = -(b * x + c) / a
        if a > 0:
            beta = min(beta, bound)
        else:
            alpha = max(alpha, bound)
    return alpha, beta


def reach_time_oracle(grid, constraints, j, M, delta_v):
    """Exhaustive min-time over admissible grid-velocity sequences.

    Backward value iteration on graphs whose nodes are (stage,
    velocity index) and whose edges come from interval arithmetic on
    the admissible-control range, mirroring the library's roundoff
    forgiveness where row corners collapse.  Two sequence semantics:

    * rounded graph (t_opt): a landing index counts as reachable when
      any continuously reachable landing velocity rounds down to it,
      with optimistic step weights evaluated one index up.  Every
      stored profile is a route here, so t_opt lower-bounds tau.
    * strict graph (t_pess): the landing grid velocity itself must be
      exactly reachable, with pessimistic corner weights.  Every
      strict route is a realizable stopping profile, so t_pess
      upper-bounds the optimal stopping time.  It does not bound the
      stored tau, whose greedy rounding losses compound at coarse M.

    Returns (t_opt, t_pess) arrays of shape (j+1, M+1).
    """
    t_opt = np.full((j + 1, M + 1), np.inf)
    t_pess = np.full((j + 1, M + 1), np.inf)
    t_opt[j, 0] = 0.0
    t_pess[j, 0] = 0.0
    for i in range(j - 1, -1, -1):
        sc = constraints[i]
        two_d = 2.0 * float(grid.deltas[i])
        top = M
        if np.isfinite(sc.x_max):
            # same index-space forgiveness as the band arithmetic
            top = int(np.floor(np.sqrt(max(sc.x_max, 0.0)) / delta_v + 1e-9))
        for m in range(min(top, M) + 1):
            x = (m * delta_v) ** 2
            xtol = 1e-9 * max(1.0, abs(x))
            alpha, beta = _row_interval(sc, x)
            tol = 1e-9 * max(1.0, abs(beta)) if np.isfinite(beta) else 0.0
            if alpha > beta + tol:
                continue
            # Collapsed corners: the library recovers u = beta, and the
            # bridge rows can pin the landing anywhere below it.
            recovered = alpha > beta
            x_lo = 0.0 if recovered else max(x + two_d * alpha, 0.0)
            # The landing must also respect the next stage's own cap.
            x_hi = min(x + two_d * beta, constraints[i + 1].x_max)
            if x_hi < -(xtol + two_d * tol) or x_hi < x_lo - xtol:
                continue
            x_hi = max(x_hi, x_lo, 0.0)
            if i + 1 == j:
                # Terminal edge: the stop must be hit exactly, so the
                # landing x = 0 has to be reachable and the crossing
                # happens at the exact start velocity.
                if (recovered or x + two_d * alpha <= xtol) and m > 0:
                    w = two_d / (m * delta_v)
                    t_opt[i, m] = w
                    t_pess[i, m] = w
                continue
            v_lo, v_hi = np.sqrt(x_lo), np.sqrt(max(x_hi, 0.0))
            m_hi = M if np.isinf(v_hi) else int(np.floor(v_hi / delta_v + 1e-9))
            m_hi = min(m_hi, M)
            m_round = max(int(np.floor(v_lo / delta_v + 1e-9)), 0)
            m_strict = max(int(np.ceil(v_lo / delta_v - 1e-9)), 0)
            for m2 in range(m_round, m_hi + 1):
                den_p = (m + m2) * delta_v
                den_o = (m + m2 + 1) * delta_v
                if np.isfinite(t_opt[i + 1, m2]):
                    t_opt[i, m] = min(t_opt[i, m], t_opt[i + 1, m2] + two_d / den_o)
                if m2 >= m_strict and np.isfinite(t_pess[i + 1, m2]):
                    w = two_d / den_p if den_p > 0 else np.inf
                    t_pess[i, m] = min(t_pess[i, m], t_pess[i + 1, m2] + w)
    return t_opt, t_pess


def interval_u(sc, x):
    """Admissible-control interval by direct row intersection."""
    lo, hi = -np.inf, np.inf
    for a, b, c in zip(sc.a, sc.b, sc.c):
        bound = -(b * x + c) / a
        if a > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
    return None if lo > hi else (lo, hi)


def _audited_route(grid, constraints, tables, j, i, k):
    """Walk the stored route, re-deriving each edge from the raw rows.

    Returns the route booked at its pessimistic grid corners, i.e. the
    true value plus at most one delta-v of rounding slack per step.
    Raises if any stored edge is not independently admissible.
    """
    from ssmtrack.reach import trace_route

    route = trace_route(tables, j, i, k)
    assert route is not None and route[-1] == 0
    dv = tables.delta_v
    total = 0.0
    for step, (m, m2) in enumerate(zip(route[:-1], route[1:])):
        stage = i + step
        sc = constraints[stage]
        x = (m * dv) ** 2
        two_d = 2.0 * float(grid.deltas[stage])
        xtol = 1e-9 * max(1.0, abs(x))
        alpha, beta = _row_interval(sc, x)
        tol = 1e-9 * max(1.0, abs(beta)) if np.isfinite(beta) else 0.0
        assert alpha <= beta + tol, (stage, m)
        recovered = alpha > beta
        # A live cell keeps every successor inside the next band.
        lb, ub = tables.band[j, stage + 1]
        assert lb <= m2 <= ub, (stage, m, m2)
        if stage + 1 == j:
            assert m2 == 0
            assert recovered or x + two_d * alpha <= xtol + two_d * tol, (stage, m)
        else:
            x_lo = 0.0 if recovered else max(x + two_d * alpha, 0.0)
            x_hi = np.inf if np.isinf(beta) else x + two_d * beta
            x_hi = min(x_hi, constraints[stage + 1].x_max) + xtol + two_d * tol
            lo_idx = int(np.floor(
                np.sqrt(max(x_lo - xtol - two_d * tol, 0.0)) / dv + 1e-9))
            hi_idx = tables.M if np.isinf(x_hi) else min(
                int(np.floor(np.sqrt(max(x_hi, 0.0)) / dv + 1e-9)), tables.M)
            assert lo_idx <= m2 <= hi_idx, (stage, m, m2)
        den = (m + m2) * dv
        total += two_d / den if den > 0 else np.inf
    return total


def _assert_greedy_dead(grid, constraints, family, tables, j, i, k):
    """A dead in-band cell must owe its deadness to the greedy scheme.

    Re-derive the cell's one step from the raw rows: either no
    admissible landing intersects the bridge, or the rounded-down
    successor is itself dead.  Anything else would be a kernel bug
    rather than coarse-grid rounding.
    """
    sc = constraints[i]
    dv = tables.delta_v
    x = (k * dv) ** 2
    two_d = 2.0 * float(grid.deltas[i])
    lo, hi = family.K[j, i + 1]
    if lo > hi:
        return
    alpha, beta = _row_interval(sc, x)
    alpha = max(alpha, (lo - x) / two_d)
    beta = min(beta, (hi - x) / two_d)
    if alpha > beta + 1e-9 * max(1.0, abs(beta)):
        return
    x_star = max(x + two_d * beta, 0.0)
    if k == 0 and x_star == 0.0:
        # From rest, a landing pinned back at rest makes the leg time
        # infinite: the segment is untraversable in this scheme.
        return
    rho_hat = min(int(np.floor(np.sqrt(x_star) / dv + 1e-9)), tables.M)
    assert not np.isfinite(tables.tau[j, i + 1, rho_hat]), (i, k, rho_hat)


def count_bracketed_cells(grid, constraints, family, tables, j):
    """tau against exhaustive enumeration, one rounding slack per step.

    Lower side: every stored profile is a route of the rounded graph,
    so the optimistic enumeration value bounds tau from below.  Upper
    side: the stored route itself, each edge re-validated against the
    raw constraint rows, booked at its pessimistic grid corners; the
    two bookings differ by exactly one delta-v of rounding per step.
    Dead in-band cells must re-derive dead.  Returns the number of
    cells checked, raising on the first violation.
    """
    t_opt, _ = reach_time_oracle(grid, constraints, j, tables.M,
                                 tables.delta_v)
    checked = 0
    for i in range(j + 1):
        l, m = tables.band[j, i]
        for k in range(l, m + 1):
            t = tables.tau[j, i, k]
            if np.isfinite(t):
                # 1e-7 relative: a landing that keeps an ulp of x after
                # the bridge round trip gains sqrt(ulp) ~ 1e-8 relative
                # velocity, undercharging the leg by that fraction.
                assert t_opt[i, k] - 1e-9 - 1e-7 * t <= t
                ub = _audited_route(grid, constraints, tables, j, i, k)
                assert t <= ub + 1e-9 + 1e-7 * t
            else:
                # band[j, j] holds only the k = 0 rest cell, never dead
                assert i < j, (i, j, k)
                _assert_greedy_dead(grid, constraints, family, tables, j, i, k)
            checked += 1
    return checked
