"""Command-line entry point: render trace CSVs into a figure."""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .plots import FigureSpec, PlotError, dump_data, plot_traces

EXIT_OK = 0
EXIT_ERROR = 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lazyplot", description="Figures from solver trace CSV files."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    plot = sub.add_parser("plot", help="plot a metric against wall time")
    plot.add_argument("--metric", required=True, help="metric column to plot")
    plot.add_argument("--out", required=True, help="output image path")
    plot.add_argument("--title", default=None, help="optional figure title")
    plot.add_argument(
        "--linear-y", action="store_true", help="linear y axis (default: log)"
    )
    plot.add_argument(
        "--dump",
        metavar="PATH",
        default=None,
        help="also write the plotted (label, time, value) rows as CSV",
    )
    plot.add_argument("csvs", nargs="+", metavar="csv", help="input trace CSVs")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csv_paths=list(args.csvs),
        metric=args.metric,
        y_log=not args.linear_y,
        title=args.title,
        output_path=args.out,
    )
    try:
        if args.dump is not None:
            with open(args.dump, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(dump_data(spec)) + "\n")
        out = plot_traces(spec)
    except (PlotError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
