#!/usr/bin/env python3
"""Per-mu campaigns over the two-parameter weight family.

For each mu the primary component is traced and its secondary bifurcation
values are printed; with --seeds the full diagram (seeded folds, census,
component count) is computed as well. The transition values mu1 ~ 3.895 and
mu2 ~ 3.925 separate the three wiring classes of the solution set.

Usage: python scripts/mu_sweep.py [--mu 3.9 3.91 3.92] [--grid N] [--seeds]
"""
import argparse
import sys
import time

from indefbif import ContinuationConfig, MuSinDescriptor
from indefbif.campaign import CampaignConfig, SeedSpec, run_campaign

ALL_CODES = ("001", "010", "100", "011", "101", "110", "111")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--mu", type=float, nargs="+",
                    default=[3.5, 3.89, 3.9, 3.91, 3.92, 3.93, 4.5])
    ap.add_argument("--grid", type=int, default=999)
    ap.add_argument("--seeds", action="store_true", help="also seed the isolated folds")
    ap.add_argument("--probe", type=float, default=-30.0)
    args = ap.parse_args()
    for mu in args.mu:
        seeds = tuple(SeedSpec(c, args.probe) for c in ALL_CODES) if args.seeds else ()
        cfg = CampaignConfig(
            descriptor=MuSinDescriptor(mu),
            n_interior=args.grid,
            continuation=ContinuationConfig(ds_init=0.1, ds_max=2.0,
                                            lambda_window=(-40.0, 13.0), max_steps=3000),
            seeds=seeds,
            probes=(args.probe, 0.0) if args.seeds else (),
        )
        t0 = time.time()
        diag = run_campaign(cfg)
        bps = sorted((ev.lam for _, ev in diag.events_of_kind("branch_point")), reverse=True)
        line = f"mu={mu:g}: secondary bifurcations {[round(v, 4) for v in bps]}"
        if args.seeds:
            line += (f", components={len(diag.components)}"
                     f", census({args.probe:g})={len(diag.census[args.probe])}"
                     f", census(0)={len(diag.census[0.0])}")
        print(line + f"   [{time.time() - t0:.1f}s]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
