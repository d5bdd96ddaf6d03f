"""render_figure <fig-id> --manifest <path> --out <path-without-extension>"""

from __future__ import annotations

import argparse
import sys

from .io import HashMismatch, SchemaError
from .registry import FIGURES, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figure",
        description="Render a figure analogue from spinkernel pipeline "
                    "artifacts")
    parser.add_argument("figure", choices=sorted(FIGURES))
    parser.add_argument("--manifest", required=True,
                        help="pipeline manifest.json")
    parser.add_argument("--out", required=True,
                        help="output path base (writes .png and .svg)")
    args = parser.parse_args(argv)
    try:
        written = render(args.figure, args.manifest, args.out)
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return 2
    except (HashMismatch, SchemaError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
