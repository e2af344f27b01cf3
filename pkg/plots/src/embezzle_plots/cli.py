"""Command line wrapper: sweep CSV (plus optional fit JSON) to an image.

The image format follows the output extension (png/svg/pdf/...).
Exit codes: 0 success, 1 usage error, 2 bad input data.
"""

from __future__ import annotations

import argparse
import sys

from .render import PlotDataError, PlotSpec, render


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def build_parser() -> _Parser:
    parser = _Parser(prog="embezzle-plot", description=__doc__)
    parser.add_argument("--input", required=True, help="sweep/figure1 CSV")
    parser.add_argument("--output", required=True, help="image path; extension picks the format")
    parser.add_argument("--fit", default=None, help="fit JSON to overlay curves")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"embezzle-plot: error: {exc}", file=sys.stderr)
        return 1
    spec = PlotSpec(input_csv=args.input, output_image=args.output, fit_json=args.fit)
    try:
        series = render(spec)
    except PlotDataError as exc:
        print(f"embezzle-plot: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output} with {len(series)} series")
    return 0


def entrypoint() -> None:  # console script
    sys.exit(main())
