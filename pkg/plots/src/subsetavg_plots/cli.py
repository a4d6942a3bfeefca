"""Entry points for the figure scripts.

plot-sweep CANDIDATES.csv AVERAGES.csv OUT.svg
plot-nscaling AVERAGES.csv OUT.svg

Exit codes match the producing CLI: 0 success, 2 bad input (missing or
schema-violating CSV, unusable flag combination), 3 output I/O error.
"""

import argparse
import sys

from .figures import TRUE_VALUE_DEFAULT, nscaling_figure, sweep_figure
from .tables import SchemaError, read_averages, read_candidates

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3


def _add_true_value(parser):
    parser.add_argument("--true-value", type=float,
                        default=TRUE_VALUE_DEFAULT, metavar="A0",
                        help="reference line for the true parameter "
                             f"(default {TRUE_VALUE_DEFAULT})")
    parser.add_argument("--no-true-value", action="store_true",
                        help="omit the reference line")


def _save(fig, out):
    try:
        fig.savefig(out)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main_sweep(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot-sweep",
        description="Render the two-panel candidate-sweep figure from the "
                    "sweep CSV tables.")
    parser.add_argument("candidates", help="candidate table CSV")
    parser.add_argument("averages", help="grand-average table CSV")
    parser.add_argument("out", help="output image path (vector formats "
                                    "like .svg or .pdf recommended)")
    _add_true_value(parser)
    args = parser.parse_args(argv)
    try:
        cand_rows = read_candidates(args.candidates)
        avg_rows = read_averages(args.averages)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    true_value = None if args.no_true_value else args.true_value
    return _save(sweep_figure(cand_rows, avg_rows, true_value), args.out)


def main_nscaling(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot-nscaling",
        description="Render grand averages against sample size from the "
                    "N-scaling CSV table.")
    parser.add_argument("averages", help="grand-average table CSV")
    parser.add_argument("out", help="output image path (vector formats "
                                    "like .svg or .pdf recommended)")
    parser.add_argument("--criterion",
                        choices=["perfect", "subspace", "both"],
                        default="both", help="series to draw")
    _add_true_value(parser)
    args = parser.parse_args(argv)
    try:
        rows = read_averages(args.averages)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.criterion != "both":
        rows = [row for row in rows if row["criterion"] == args.criterion]
        if not rows:
            print(f"schema error: {args.averages}: no rows with criterion "
                  f"{args.criterion!r}", file=sys.stderr)
            return EXIT_INPUT
    true_value = None if args.no_true_value else args.true_value
    return _save(nscaling_figure(rows, true_value), args.out)
