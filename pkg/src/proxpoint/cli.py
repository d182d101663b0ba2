"""Command-line entry point for the benchmark harness.

    bench run <config> [--output-dir DIR] [--parallel N]
    bench sweep <config> --param <section.field> --values v1,v2,... [--output-dir DIR]
    bench summarize <dir>

The BENCH_THREADS environment variable overrides the config's parallelism.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import bench


def _add_common(sub):
    sub.add_argument("config", help="experiment config file")
    sub.add_argument("--output-dir", default=None, help="override the config output_dir")
    sub.add_argument("--parallel", type=int, default=None, help="worker count override")


def build_parser():
    ap = argparse.ArgumentParser(prog="bench", description=__doc__.strip().splitlines()[0])
    sp = ap.add_subparsers(dest="command", required=True)

    run = sp.add_parser("run", help="run one experiment config")
    _add_common(run)

    sweep = sp.add_parser("sweep", help="re-run an experiment over a parameter grid")
    _add_common(sweep)
    sweep.add_argument("--param", required=True, help="e.g. solver:ripp_psgm.rho or problem.n")
    sweep.add_argument("--values", required=True, help="comma-separated values")

    summ = sp.add_parser("summarize", help="summarize the trace CSVs in a directory")
    summ.add_argument("directory")
    return ap


def _print_rows(rows):
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(bench.SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([bench._fmt(r.get(c, float("nan"))) for c in bench.SUMMARY_COLUMNS])


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = bench.parse_config(args.config)
            rows = bench.run_experiment(cfg, output_dir=args.output_dir, parallel=args.parallel)
            _print_rows(rows)
        elif args.command == "sweep":
            cfg = bench.parse_config(args.config)
            values = [bench._typed(v) for v in args.values.split(",") if v.strip()]
            if not values:
                raise bench.ConfigError("--values is empty")
            rows = bench.run_sweep(
                cfg, args.param, values, output_dir=args.output_dir, parallel=args.parallel
            )
            _print_rows(rows)
        else:
            _print_rows(bench.summarize_dir(args.directory))
    except bench.ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
