"""`hcran-plots render --sweep sweep.csv --trace trace.csv --out figures/`"""

from __future__ import annotations

import argparse
import sys

from .render import render
from .schema import EmptyTableError, SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcran-plots",
                                     description="Render simulator CSV outputs as figures")
    sub = parser.add_subparsers(dest="command", required=True)
    ren = sub.add_parser("render", help="render the seven figure analogues")
    ren.add_argument("--sweep", required=True, help="sweep/summary CSV")
    ren.add_argument("--trace", required=True, help="per-slot trace CSV")
    ren.add_argument("--out", required=True, help="output directory for images")
    ren.set_defaults(func=_cmd_render)
    return parser


def _cmd_render(args) -> int:
    try:
        paths = render(args.sweep, args.trace, args.out)
    except EmptyTableError as exc:
        print(f"warning: nothing to plot ({exc})", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
