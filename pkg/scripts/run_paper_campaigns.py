#!/usr/bin/env python3
"""Run the four headline campaigns (three sin families plus mu = 4.5) and
export CSV/SVG diagrams under out/.

Usage: python scripts/run_paper_campaigns.py [--grid N] [--out DIR]
"""
import argparse
import sys
import time
from pathlib import Path

from indefbif.cli import main as cli_main

CONFIGS = ["sin1.toml", "sin2.toml", "sin3.toml", "musin_45.toml"]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=None)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    cfg_dir = Path(__file__).resolve().parents[1] / "configs"
    worst = 0
    for name in CONFIGS:
        argv = ["run", str(cfg_dir / name), "--out", str(Path(args.out) / Path(name).stem)]
        if args.grid:
            argv += ["--grid", str(args.grid)]
        t0 = time.time()
        print(f"=== {name} ===")
        rc = cli_main(argv)
        print(f"=== {name}: exit {rc} in {time.time() - t0:.1f}s ===\n")
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(main())
