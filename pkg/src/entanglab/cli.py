"""Command line front end.

Subcommands:
  validate                 run the self-check suite, print the report
  sweep    --config FILE   run a classification grid, emit CSV (and plots)
  region   --input CSV     extract the pooled success region above a threshold
  variance --config FILE   estimator variance sweep with fitted slopes
  plot     --input CSV     render success-rate heatmaps to SVG

Exit codes: 0 success, 1 a validation check failed, 2 bad configuration.
Worker processes for sweeps come from the ENTANGLAB_WORKERS env var.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments, selfcheck
from .config import WORKERS_ENV_VAR
from .experiments import ConfigError


def _cmd_validate(args) -> int:
    report = selfcheck.validate()
    print(selfcheck.render_report(report))
    return 0 if report.all_passed else 1


def _cmd_sweep(args) -> int:
    config = experiments.load_config(args.config)
    run = experiments.run_grid(config)
    for skip in run.skips:
        print(
            f"skipped d={skip.d} N={skip.n} S={skip.s} {skip.method}: {skip.reason}",
            file=sys.stderr,
        )
    if args.csv:
        experiments.write_csv(run.rows, args.csv)
        print(f"wrote {len(run.rows)} rows to {args.csv}", file=sys.stderr)
    else:
        sys.stdout.write(experiments.rows_to_csv(run.rows))
    if args.plots:
        paths = experiments.write_heatmaps(
            run.rows, args.plots, config.success_threshold, xaxis=args.xaxis
        )
        for p in paths:
            print(f"wrote {p}", file=sys.stderr)
    return 0


def _cmd_region(args) -> int:
    rows = experiments.read_csv(args.input)
    region = experiments.success_region(rows, args.threshold)
    for (d, method) in sorted(region):
        cells = region[(d, method)]
        print(f"d={d} method={method}: {len(cells)} cells at or above {args.threshold:g}")
        for n, s in sorted(cells):
            print(f"  N={n} S={s}")
        frontier = experiments.region_frontier(cells)
        for n in sorted(frontier):
            print(f"  frontier N={n}: S>={frontier[n]}")
    return 0


def _cmd_variance(args) -> int:
    vc = experiments.load_variance_config(args.config)
    sweep = experiments.variance_sweep(vc)
    table = experiments.variance_table_csv(sweep)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(table)
    for key in sorted(sweep["slopes"]):
        print(f"slope {key} = {sweep['slopes'][key]:+.3f}", file=sys.stderr)
    return 0


def _cmd_plot(args) -> int:
    rows = experiments.read_csv(args.input)
    paths = experiments.write_heatmaps(rows, args.out, args.threshold, xaxis=args.xaxis)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entanglab",
        description="Simulated entanglement classification experiments.",
        epilog=f"Set {WORKERS_ENV_VAR} to parallelize sweeps across processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run self checks against exact results")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("sweep", help="run a (d, N, S, method) classification grid")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--csv", help="output CSV path (default: stdout)")
    p.add_argument("--plots", help="also write heatmap SVGs to this directory")
    p.add_argument("--xaxis", choices=("S", "NS"), default="S",
                   help="vertical heatmap axis: shots or total budget N*S")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("region", help="pooled success region from sweep output")
    p.add_argument("--input", required=True, help="CSV produced by sweep")
    p.add_argument("--threshold", type=float, default=0.99)
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("variance", help="estimator variance scaling sweep")
    p.add_argument("--config", required=True, help="JSON variance config")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=_cmd_variance)

    p = sub.add_parser("plot", help="render success heatmaps from sweep output")
    p.add_argument("--input", required=True, help="CSV produced by sweep")
    p.add_argument("--out", required=True, help="output directory for SVGs")
    p.add_argument("--xaxis", choices=("S", "NS"), default="S")
    p.add_argument("--threshold", type=float, default=0.99,
                   help="success level outlined on the plots")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
