"""Command line entry point: report_plots <kind> --in DIR --out FILE."""

from __future__ import annotations

import argparse
import sys

from .figures import (
    Refusal,
    plot_deviation,
    plot_kramers,
    plot_mean_scaling,
    plot_mechanism,
    plot_survival,
)
from .schemas import SchemaError

KINDS = {
    "survival": plot_survival,
    "mean_scaling": plot_mean_scaling,
    "kramers": plot_kramers,
    "mechanism": plot_mechanism,
    "deviation": plot_deviation,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="report_plots",
        description="Render figures from the exit-time experiment outputs",
    )
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument(
        "--in", dest="in_dir", required=True,
        help="directory holding the run outputs (records.csv, sweep.csv, ...)",
    )
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--constant", type=float, default=None,
        help="envelope constant for the survival plot sandwich curves",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    builder = KINDS[args.kind]
    try:
        if args.kind == "survival":
            info = builder(args.in_dir, args.out, constant=args.constant)
        else:
            info = builder(args.in_dir, args.out)
    except (SchemaError, Refusal) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 2
    except Exception as exc:  # keep the error channel one line per failure
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    notes = "; ".join(f"{k}={v}" for k, v in info.annotations.items())
    sys.stdout.write(f"{info.path} ({notes or 'ok'})\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
