"""Command line entry point: plotkit <figure-kind> <inputs...> -o <path>."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_IO = 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="render figures from trace.csv / report.json artifacts")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("inputs", nargs="+",
                        help="input files (trace.csv, report.json, profile.csv)")
    parser.add_argument("-o", "--output", required=True,
                        help="image output path")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs),
                          output=args.output)
        path = render(spec)
    except SchemaError as exc:
        if not args.quiet:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        if not args.quiet:
            print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
