"""Command line entry: render figures for one or more run directories."""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import PANELS, FigureRecipe, render


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="stringplots", description=__doc__)
    p.add_argument("run_dirs", nargs="+", help="run directories with CSV/JSON artifacts")
    p.add_argument("--out", default="figs", help="output directory for images")
    p.add_argument("--panels", nargs="+", default=list(PANELS),
                   choices=PANELS, help="panels to draw")
    p.add_argument("--formats", nargs="+", default=["png", "svg"],
                   choices=["png", "svg"], help="image formats")
    args = p.parse_args(argv)
    try:
        for run_dir in args.run_dirs:
            recipe = FigureRecipe(run_dir, args.out, tuple(args.panels),
                                  tuple(args.formats))
            for path in render(recipe):
                print(path)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
