"""Command-line interface.

Subcommands:
  run <config>                 full campaign, CSV/SVG exports, summary
  d1d2 <weight-spec>           local bifurcation directions for a weight
  evolve <config>              evolution from the configured subsolution
  census <config> --lambda V   solution census at one probe value

Exit codes: 0 on full success, 2 when some branches failed but the campaign
completed, 1 on fatal errors. The only environment variable honored is
INDEFBIF_THREADS (thread-pool size for preparing independent seeds).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .campaign import run_campaign
from .config_io import ConfigError, load_campaign, load_evolve
from .discretization import build_grid, descriptor_from_spec, sample_weight
from .exports import export_csv, export_svg, report_summary
from .parabolic import (
    BlowUpError,
    EvolutionTimeoutError,
    build_subsolution,
    evolve_to_steady,
    make_subsolution,
)
from .spectral import local_direction

__all__ = ["main"]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("INDEFBIF_THREADS", "1")))
    except ValueError:
        return 1


def _cmd_run(args) -> int:
    cfg = load_campaign(
        args.config, grid_override=args.grid, out_override=args.out,
        svg_override=(True if args.svg else False if args.no_svg else None),
    )
    cfg = replace(cfg, workers=_threads())
    diagram = run_campaign(cfg)
    if not diagram.branches:
        print("fatal: no positive branches were found", file=sys.stderr)
        for f in diagram.failures:
            print(f"  [{f.stage}] {f.detail}", file=sys.stderr)
        return 1
    out_dir = cfg.out_dir or "out"
    written = export_csv(diagram, out_dir)
    if cfg.svg:
        written.append(export_svg(diagram, Path(out_dir) / "diagram.svg"))
    print(report_summary(diagram), end="")
    print(f"wrote {len(written)} files to {out_dir}")
    return 2 if diagram.failures else 0


def _cmd_d1d2(args) -> int:
    desc = descriptor_from_spec(args.weight_spec)
    d = local_direction(desc)
    print(f"weight: {json.dumps(desc.to_dict(), sort_keys=True)}")
    print(f"D1 = {d.d1:.12g}")
    if d.d2 is None:
        print("D2 = (not computed: D1 is nonzero)")
    else:
        print(f"D2 = {d.d2:.12g}")
    print(f"bifurcation at lambda = pi^2 is {d.regime}")
    return 0


def _cmd_evolve(args) -> int:
    cfg = load_campaign(args.config, grid_override=args.grid, out_override=args.out)
    job = load_evolve(args.config)
    grid = build_grid(cfg.n_interior)
    weight = sample_weight(cfg.descriptor, grid)
    spec = make_subsolution(job.code, job.lam, weight, grid, cfg.newton)
    u0 = build_subsolution(spec, grid)
    out_dir = Path(cfg.out_dir or "out")
    status = 0
    try:
        outcome = evolve_to_steady(u0, job.lam, weight, grid, job.cfg, cfg.newton)
        snapshots = outcome.snapshots
        print(
            f"settled at t={outcome.state.t:.6g}: max_u={outcome.point.max_u:.6g} "
            f"residual={outcome.point.residual_norm:.3e} stalled={outcome.stalled}"
        )
        print(f"trajectory max (boundedness witness): {outcome.trajectory_max:.6g}")
        print(f"monotone violation: {outcome.state.monotone_violation:.3e}")
    except BlowUpError as exc:
        snapshots = ((exc.state.t, exc.state.u),)
        print(f"blow-up at t={exc.state.t:.6g} (|u| passed the threshold); "
              f"monotone violation up to there: {exc.state.monotone_violation:.3e}")
        status = 2
    except EvolutionTimeoutError as exc:
        snapshots = ((exc.state.t, exc.state.u),)
        print(f"no steady state by t_max={job.cfg.t_max:g}")
        status = 2
    if args.snapshots:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "trajectory.csv"
        sub = max(1, grid.n_interior // 200)
        cols = list(range(0, grid.n_interior, sub))
        rows = ["t," + ",".join(f"u{i+1}" for i in cols)]
        for t, u in snapshots:
            rows.append(f"{t:.12g}," + ",".join("%.12g" % u[i] for i in cols))
        path.write_text("\n".join(rows) + "\n")
        print(f"wrote {path}")
    return status


def _cmd_census(args) -> int:
    cfg = load_campaign(args.config, grid_override=args.grid)
    probes = tuple(sorted(set(cfg.probes) | {args.lam}))
    cfg = replace(cfg, probes=probes, workers=_threads())
    diagram = run_campaign(cfg)
    if not diagram.branches:
        print("fatal: no positive branches were found", file=sys.stderr)
        return 1
    pts = diagram.census.get(args.lam, [])
    print(f"census at lambda = {args.lam:g}: {len(pts)} solutions")
    for p in pts:
        code = p.bump_code or "?"
        morse = p.morse_index if p.morse_index is not None else "?"
        print(f"  {code}({morse})  u'(0) = {p.uprime0:.6g}  max u = {p.max_u:.6g}")
    return 2 if diagram.failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="indefbif",
        description="Bifurcation diagrams for -u'' = lam*u + a(x)*u^2 with sign-changing a",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a campaign from a TOML config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--grid", type=int, default=None, help="override n_interior")
    p_run.add_argument("--svg", action="store_true", help="force SVG export on")
    p_run.add_argument("--no-svg", action="store_true", help="force SVG export off")
    p_run.set_defaults(func=_cmd_run)

    p_d = sub.add_parser("d1d2", help="local bifurcation directions of a weight")
    p_d.add_argument("weight_spec", help='JSON, e.g. \'{"kind":"sin","n":2}\'')
    p_d.set_defaults(func=_cmd_d1d2)

    p_e = sub.add_parser("evolve", help="evolve from the [evolve] subsolution of a config")
    p_e.add_argument("config")
    p_e.add_argument("--out", default=None)
    p_e.add_argument("--grid", type=int, default=None)
    p_e.add_argument("--snapshots", action="store_true", help="dump trajectory CSV")
    p_e.set_defaults(func=_cmd_evolve)

    p_c = sub.add_parser("census", help="solution census at a probe lambda")
    p_c.add_argument("config")
    p_c.add_argument("--lambda", dest="lam", type=float, required=True)
    p_c.add_argument("--grid", type=int, default=None)
    p_c.set_defaults(func=_cmd_census)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
