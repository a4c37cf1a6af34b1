#!/usr/bin/env python3
"""Quenching study: how fast the steady states vanish between the bumps.

Tabulates the max of the bump-code steady states over compact subsets of the
negative intervals as lam decreases, for several inset choices. The values
at the default 2h inset are dominated by the boundary layers the bumps press
into the negative intervals (their width scales like 1/sqrt|lam|), which is
why the interior columns decay much faster than the near-edge ones.

Usage: python scripts/decay_study.py [--family 1] [--code 11] [--grid N]
"""
import argparse
import sys

from indefbif import SinDescriptor, build_grid, sample_weight
from indefbif.parabolic import SteadyFamily, decay_profile


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--family", type=int, default=1, choices=(1, 2, 3))
    ap.add_argument("--code", default="11")
    ap.add_argument("--grid", type=int, default=999)
    ap.add_argument("--lambdas", type=float, nargs="+",
                    default=[-50.0, -100.0, -200.0, -400.0, -800.0])
    args = ap.parse_args()
    grid = build_grid(args.grid)
    weight = sample_weight(SinDescriptor(args.family), grid)
    width = weight.negative_intervals()[0].right - weight.negative_intervals()[0].left
    insets = [2.0 * grid.h, 0.125 * width, 0.25 * width, 0.45 * width]
    header = "lambda    " + "".join(f"inset={i:<8.4f}" for i in insets)
    print(header)
    columns = [
        decay_profile(args.lambdas, SteadyFamily(args.code), weight, grid, inset=i)
        for i in insets
    ]
    for k, lam in enumerate(args.lambdas):
        cells = []
        for col in columns:
            row = col[k]
            cells.append("   missing  " if row.missing else f"{row.value:12.4e}")
        print(f"{lam:8.1f}  " + "".join(cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
