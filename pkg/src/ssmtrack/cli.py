"""Command line front end.

Subcommands:
  precompute  build the offline artifact for a scenario
  run         play a scenario and write the cycle log
  race        tracking controller vs reactive baseline, print both
  bench       kernel and precompute benchmarks
  serve       WebSocket session service for the browser client
"""

import argparse
import sys

import numpy as np

from . import _kernels
from .artifact import load_artifact, save_artifact
from .sim import Scenario, build_world, load_scenario, run_race, run_scenario


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return "inf" if not np.isfinite(v) else f"{v:.6g}"
    return str(v)


def _print_table(d, title=None):
    if title:
        print(title)
    width = max(len(k) for k in d)
    for k, v in d.items():
        print(f"  {k:<{width}}  {_fmt(v)}")


def cmd_precompute(args):
    scn = load_scenario(args.scenario)
    world = build_world(scn)
    meta = save_artifact(args.out, world.grid, world.limits, world.family,
                         world.tables, world.centers, world.robot.sphere_radii)
    _print_table(meta, f"wrote {args.out}")
    return 0


def cmd_run(args):
    scn = load_scenario(args.scenario)
    pre = None
    if args.art:
        pre = load_artifact(args.art)
    elif scn.controller == "ours":
        print("run: --art is required for controller 'ours' "
              "(build one with precompute)", file=sys.stderr)
        return 2
    summary, _ = run_scenario(scn, csv_path=args.log, keep_states=False,
                              precomputed=pre)
    _print_table(summary, "episode summary")
    return 0


def cmd_race(args):
    scn = load_scenario(args.scenario) if args.scenario else None
    summary, _, _ = run_race(scn, csv_dir=args.csv_dir)
    _print_table(summary, "race summary")
    ours, base = summary["arrival_time"], summary["arrival_time_baseline"]
    if ours is not None and (base is None or ours < base):
        print("tracking controller arrives first")
    return 0


def cmd_bench(args):
    from . import bench

    if args.threads:
        _kernels.set_threads(args.threads)
    print(f"backend={_kernels.backend_name()} threads={_kernels.get_threads()}")
    rows = []
    row = bench.bench_precompute(args.n, args.m)
    _print_table(row, "precompute")
    rows.append(row)
    row = bench.bench_tables(args.n, args.m, naive=not args.quick)
    _print_table(row, "tables: batched vs per-cell")
    rows.append(row)
    for row in bench.bench_lp_backends():
        _print_table(row, "lp backend")
        rows.append(row)
    row = bench.bench_cycle(m=args.m)
    _print_table(row, "executor cycle")
    rows.append(row)
    if args.csv:
        bench.write_csv(args.csv, [{k: _fmt(v) for k, v in r.items()} for r in rows])
        print(f"wrote {args.csv}")
    return 0


def cmd_serve(args):
    from .service import serve

    scn = load_scenario(args.scenario)
    pre = load_artifact(args.art) if args.art else None
    serve(scn, precomputed=pre, port=args.port, pace=args.pace)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ssmtrack")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("precompute", help="build the offline artifact")
    q.add_argument("--scenario", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(fn=cmd_precompute)

    q = sub.add_parser("run", help="play one scenario")
    q.add_argument("--scenario", required=True)
    q.add_argument("--art")
    q.add_argument("--log")
    q.set_defaults(fn=cmd_run)

    q = sub.add_parser("race", help="tracking vs baseline drag race")
    q.add_argument("--scenario")
    q.add_argument("--csv-dir")
    q.set_defaults(fn=cmd_race)

    q = sub.add_parser("bench", help="benchmarks")
    q.add_argument("--n", type=int, default=300)
    q.add_argument("--m", type=int, default=30)
    q.add_argument("--threads", type=int)
    q.add_argument("--csv")
    q.add_argument("--quick", action="store_true",
                   help="skip the slow per-cell comparison")
    q.set_defaults(fn=cmd_bench)

    q = sub.add_parser("serve", help="WebSocket session service")
    q.add_argument("--scenario", required=True)
    q.add_argument("--art")
    q.add_argument("--port", type=int, default=8700)
    q.add_argument("--pace", type=float, default=1.0,
                   help="sim seconds per wall second; 0 runs flat out")
    q.set_defaults(fn=cmd_serve)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
