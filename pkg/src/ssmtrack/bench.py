"""Benchmarks: kernel backends, batched vs per-cell tables, scaling.

Everything here returns plain dict rows so the CLI can print them and
tests can assert on them; write_csv dumps any row list.
"""

import csv
import time

import numpy as np

from . import _kernels
from .constraints import LimitSpec, build_constraints
from .path import build_spline, discretize
from .reach import (EPS_IDX, REL_TOL, ReachTables, _band_edges, compute_delta_v,
                    compute_stoppable_sets, compute_tables)
from .robots import centers_over_grid, planar_arm
from .sim import PursuitScript


def best_wall(fn, repeats=3):
    """Best-of-n wall time in seconds, plus the last return value."""
    best, out = np.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def write_csv(path, rows):
    if not rows:
        return
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def fit_r2(x, y, deg):
    """Coefficient of determination for a degree-`deg` polynomial fit."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    coef = np.polyfit(x, y, deg)
    ss_res = float(np.sum((y - np.polyval(coef, x)) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def bench_world(n, dof=3, seed=0):
    """Synthetic smooth arm path with n segments."""
    rng = np.random.default_rng(seed)
    waypoints = np.cumsum(rng.uniform(-0.9, 0.9, size=(6, dof)), axis=0)
    grid = discretize(build_spline(waypoints), n)
    lim = LimitSpec(v_max=np.full(dof, 2.0), a_max=np.full(dof, 8.0))
    return grid, lim, build_constraints(grid, lim)


# ---------------------------------------------------------------------------
# Reference per-cell implementation of the braking-time tables
# ---------------------------------------------------------------------------

def tables_naive(family, constraints, grid, M):
    """Scalar per-cell rebuild of the tables: one tiny LP per cell.

    Same arithmetic and reduction order as the batched path, so the
    result is bitwise identical; only the looping differs.  Serves as
    the honesty check for the batched driver and as the benchmark
    comparator.
    """
    delta_v = compute_delta_v(family, M)
    n = grid.n_segments
    K = family.K
    tau = np.full((n + 1, n + 1, M + 1), np.inf)
    rho = np.full((n + 1, n + 1, M + 1), -1, dtype=np.int64)
    band = np.zeros((n + 1, n + 1, 2), dtype=np.int64)
    band[:, :, 1] = -1
    for j in range(n + 1):
        tau[j, j, 0] = 0.0
        band[j, j] = (0, 0)
    if delta_v == 0.0:
        for j in range(n + 1):
            for i in range(j):
                if K[j, i, 0] <= K[j, i, 1]:
                    band[j, i] = (0, 0)
        return ReachTables(delta_v=0.0, M=M, tau=tau, rho=rho, band=band)
    stage_rows = []
    for sc in constraints:
        stage_rows.append([(float(a), float(b), float(c))
                           for a, b, c in zip(sc.a, sc.b, sc.c)])
    for j in range(1, n + 1):
        for i in range(j - 1, -1, -1):
            lo, hi = K[j, i]
            if lo > hi:
                continue
            l, m = _band_edges(lo, hi, delta_v, M)
            if l > m:
                continue
            band[j, i] = (l, m)
            lo1, hi1 = K[j, i + 1]
            two_d = 2.0 * float(grid.deltas[i])
            inv2d = 1.0 / two_d
            rows = stage_rows[i]
            for k in range(l, m + 1):
                x = (k * delta_v) ** 2
                beta = np.inf
                alpha = -np.inf
                for a, b, c in rows:
                    r = -(b * x + c) / a
                    if a > 0.0:
                        beta = min(beta, r)
                    else:
                        alpha = max(alpha, r)
                beta = min(beta, (hi1 - x) * inv2d)
                alpha = max(alpha, (lo1 - x) * inv2d)
                if alpha > beta and alpha - beta > REL_TOL * max(1.0, abs(beta)):
                    continue
                u = beta
                x1 = max(x + two_d * u, 0.0)
                v0, v1 = np.sqrt(x), np.sqrt(x1)
                den = v0 + v1
                t = two_d / den if den > 0.0 else np.inf
                r_k = min(int(np.floor(v1 / delta_v + EPS_IDX)), M)
                tau[j, i, k] = tau[j, i + 1, r_k] + t
                if np.isfinite(t):
                    rho[j, i, k] = r_k
    return ReachTables(delta_v=delta_v, M=M, tau=tau, rho=rho, band=band)


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------

def bench_tables(n=300, m=50, repeats=1, naive=True):
    """Batched tables build vs the per-cell scalar reference."""
    grid, _, cons = bench_world(n)
    family = compute_stoppable_sets(cons, grid)
    t_batch, tables = best_wall(lambda: compute_tables(family, cons, grid, m),
                                repeats=max(repeats, 2))
    row = {"n": n, "m": m, "backend": _kernels.backend_name(),
           "batched_s": t_batch, "n_cells": tables.stats["n_cells"],
           "n_lp": tables.stats["n_lp"]}
    if naive:
        t_naive, _ = best_wall(lambda: tables_naive(family, cons, grid, m),
                               repeats=repeats)
        row["naive_s"] = t_naive
        row["speedup"] = t_naive / t_batch
    return row


def bench_precompute(n, m, repeats=1, world=None):
    """Stoppable sweep plus tables, end to end."""
    grid, _, cons = world if world is not None else bench_world(n)
    t_sweep, family = best_wall(lambda: compute_stoppable_sets(cons, grid),
                                repeats=repeats)
    t_tab, tables = best_wall(lambda: compute_tables(family, cons, grid, m),
                              repeats=repeats)
    return {"n": n, "m": m, "backend": _kernels.backend_name(),
            "sweep_s": t_sweep, "tables_s": t_tab, "total_s": t_sweep + t_tab,
            "n_cells": tables.stats["n_cells"], "n_lp": tables.stats["n_lp"]}


def sweep_m(ms=(10, 20, 30, 40, 50), n=300, repeats=1):
    world = bench_world(n)
    return [bench_precompute(n, m, repeats=repeats, world=world) for m in ms]


def sweep_n(ns=(100, 200, 300, 400, 500), m=50, repeats=1):
    return [bench_precompute(n, m, repeats=repeats) for n in ns]


def bench_lp_backends(n_problems=200_000, rows_per=8, seed=0):
    """Wall time per backend for one batched LP solve."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.2, 2.0, size=n_problems * rows_per)
    a *= rng.choice([-1.0, 1.0], size=a.shape)
    b = rng.uniform(-1.0, 5.0, size=a.shape)
    offsets = np.arange(n_problems + 1, dtype=np.int64) * rows_per
    out = []
    backends = [("numpy", _kernels.lp1_batch_numpy)]
    if _kernels.HAVE_NUMBA:
        _kernels.lp1_batch_numba(a[:rows_per], b[:rows_per], offsets[:2])
        backends.append(("numba", _kernels.lp1_batch_numba))
    for name, fn in backends:
        t, _ = best_wall(lambda fn=fn: fn(a, b, offsets), repeats=3)
        out.append({"kernel": "lp1_batch", "backend": name,
                    "n_problems": n_problems, "rows_per": rows_per,
                    "threads": _kernels.get_threads(), "wall_ns": int(t * 1e9)})
    return out


def bench_cycle(n=517, m=30, steps=250, seed=0):
    """Per-cycle executor latency against a pursuing obstacle."""
    from .executor import SafeExecutor

    grid, lim, cons = bench_world(n, seed=seed)
    family = compute_stoppable_sets(cons, grid)
    tables = compute_tables(family, cons, grid, m)
    robot = planar_arm(dof=grid.dof)
    centers = centers_over_grid(robot, grid)
    ex = SafeExecutor(grid, cons, family, tables, centers, robot.sphere_radii,
                      d_protective=0.05, dt=0.004)
    script = PursuitScript("p0", [1.5, 0.0, 0.0], 0.05, 1.6)
    times = []
    for _ in range(steps):
        script.update(ex.t, ex.dt, ex.current_centers())
        obs = [script.obstacle()]
        t0 = time.perf_counter()
        ex.step(obs)
        times.append(time.perf_counter() - t0)
    arr = np.array(times[5:])
    return {"n": grid.n_segments, "m": m, "steps": steps,
            "backend": _kernels.backend_name(),
            "mean_ms": float(arr.mean() * 1e3),
            "p99_ms": float(np.percentile(arr, 99) * 1e3),
            "max_ms": float(arr.max() * 1e3)}
