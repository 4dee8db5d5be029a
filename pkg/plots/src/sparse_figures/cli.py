"""Command-line wrapper: one figure per invocation.

Exit codes: 0 success, 2 bad arguments or schema mismatch, 5 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURES, SchemaError, render_figure, save_figure


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparse-figures",
        description="Render a sweep figure from the experiment toolkit's CSV files.",
    )
    parser.add_argument("figure", choices=FIGURES)
    parser.add_argument("--summary", help="summary CSV path")
    parser.add_argument("--trials", help="trial CSV path")
    parser.add_argument("--out", required=True, help="output image path (vector by default: .svg)")
    parser.add_argument(
        "--overlay-threshold",
        type=float,
        default=None,
        help="x position for the phase-transition threshold line",
    )
    parser.add_argument(
        "--fixed-style",
        action="store_true",
        help="make rerenders of identical inputs byte-identical",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        fig = render_figure(
            args.figure,
            trials=args.trials,
            summary=args.summary,
            overlay_threshold=args.overlay_threshold,
        )
        save_figure(fig, args.out, fixed_style=args.fixed_style)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
