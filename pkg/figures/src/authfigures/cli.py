"""Command line: regenerate one figure per scenario from simulation CSVs.

    arrayauth-figures --scenario miss --csv results/miss_*.csv --out figs/miss

Exit code 0 only when the figure was written; schema mismatches exit nonzero.
"""

from __future__ import annotations

import argparse
import sys

from authfigures.plotting import FigureSpec, SchemaError, plot_rate_curve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arrayauth-figures", description=__doc__)
    parser.add_argument("--scenario", required=True, choices=("miss", "fa_noise", "intruder"))
    parser.add_argument("--csv", required=True, nargs="+", help="input CSVs (simulator schema)")
    parser.add_argument("--out", required=True, help="output base path (writes .png and .svg)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--snr-limits", default=None, help="lo:hi x-axis range")
    parser.add_argument("--rate-limits", default=None, help="lo:hi y-axis range")
    return parser


def _limits(text):
    if text is None:
        return None
    lo, hi = (float(v) for v in text.split(":"))
    return (lo, hi)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            csv_paths=tuple(args.csv),
            output_base=args.out,
            scenario=args.scenario,
            snr_limits=_limits(args.snr_limits),
            rate_limits=_limits(args.rate_limits),
            title=args.title,
        )
        series = plot_rate_curve(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}.png and {args.out}.svg ({len(series)} curve(s))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
