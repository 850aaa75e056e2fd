"""Command line wrapper: CSV paths in, one PNG/SVG out."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, X_CHOICES, Y_CHOICES, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasar-plots",
        description="draw comparison curves from benchmark trace CSVs",
    )
    parser.add_argument("csvs", nargs="+", help="input trace CSV paths")
    parser.add_argument("--x", default="iteration", choices=X_CHOICES)
    parser.add_argument("--y", default="f_gap", choices=Y_CHOICES)
    parser.add_argument("--linear-y", action="store_true",
                        help="disable the default log scale on y")
    parser.add_argument("--no-bands", action="store_true",
                        help="suppress min/max bands across seeds")
    parser.add_argument("--title", default=None)
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    args = parser.parse_args(argv)

    spec = PlotSpec(
        csv_paths=tuple(args.csvs),
        x=args.x,
        y=args.y,
        log_y=not args.linear_y,
        out=args.out,
        bands=not args.no_bands,
        title=args.title,
    )
    try:
        render(spec)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
