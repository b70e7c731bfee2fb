"""Script entry point: fluxfig --kind wells|crossing|dephasing --input ... --output ..."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, MissingColumnError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fluxfig",
                                     description="Regenerate figures from fluxcat CSVs")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--input", required=True, nargs="+",
                        help="input CSV path(s); wells takes one per panel")
    parser.add_argument("--output", required=True,
                        help="output image path (.png; an .svg twin is written too)")
    args = parser.parse_args(argv)
    try:
        info = render(FigureSpec(args.kind, list(args.input), args.output))
    except (MissingColumnError, ValueError, OSError) as exc:
        print(f"fluxfig: {exc}", file=sys.stderr)
        return 2
    for path in info["outputs"]:
        print(path)
    if args.kind == "dephasing":
        zone = info.get("zone")
        print(f"shaded zone: {zone if zone else 'empty'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
