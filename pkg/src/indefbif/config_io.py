"""TOML campaign configs: flat tables for weight/grid/continuation/newton/
seeds/probes/output, plus an optional [evolve] table for the evolution
subcommand. See configs/ for committed examples."""
from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .campaign import CampaignConfig, SeedSpec
from .continuation import ContinuationConfig
from .discretization import descriptor_from_dict
from .nonlinear import NewtonConfig
from .parabolic import EvolveConfig

__all__ = ["load_campaign", "load_evolve", "EvolveJob", "ConfigError"]


class ConfigError(ValueError):
    pass


def _read(path) -> dict:
    p = Path(path)
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {p}: {exc}") from exc


def load_campaign(
    path,
    *,
    grid_override: int | None = None,
    out_override: str | None = None,
    svg_override: bool | None = None,
) -> CampaignConfig:
    raw = _read(path)
    try:
        descriptor = descriptor_from_dict(raw["weight"])
    except KeyError as exc:
        raise ConfigError("config needs a [weight] table with a 'kind'") from exc
    n_interior = int(raw.get("grid", {}).get("n_interior", 999))
    if grid_override is not None:
        n_interior = grid_override

    c = raw.get("continuation", {})
    cont = ContinuationConfig(
        ds_init=float(c.get("ds_init", 0.1)),
        ds_min=float(c.get("ds_min", 1e-6)),
        ds_max=float(c.get("ds_max", 2.0)),
        lambda_window=(float(c.get("lambda_min", -60.0)), float(c.get("lambda_max", 13.0))),
        max_steps=int(c.get("max_steps", 3000)),
        u_scale=float(c["u_scale"]) if "u_scale" in c else None,
        refine_dlambda=float(c.get("refine_dlambda", 1e-4)),
    )
    nw = raw.get("newton", {})
    newton = NewtonConfig(
        tol_newton=float(nw.get("tol", 1e-10)),
        max_iter=int(nw.get("max_iter", 30)),
        damping_min=float(nw.get("damping_min", 1e-4)),
    )
    seeds_tbl = raw.get("seeds", {})
    seeds: list[SeedSpec] = []
    default_lam = seeds_tbl.get("lambda")
    for code in seeds_tbl.get("codes", []):
        if default_lam is None:
            raise ConfigError("[seeds] codes given without a seeding lambda")
        seeds.append(SeedSpec(code=str(code), lam=float(default_lam)))
    for entry in seeds_tbl.get("entries", []):
        seeds.append(SeedSpec(code=str(entry["code"]), lam=float(entry["lambda"])))
    for s in seeds:
        if len(s.code) != descriptor.positive_count or any(ch not in "01" for ch in s.code):
            raise ConfigError(f"seed code {s.code!r} invalid for this weight")
        if not cont.lambda_window[0] <= s.lam <= cont.lambda_window[1]:
            raise ConfigError(f"seed lambda {s.lam} outside the lambda window")

    probes = tuple(float(v) for v in raw.get("probes", {}).get("lambdas", []))
    for p in probes:
        if not cont.lambda_window[0] <= p <= cont.lambda_window[1]:
            raise ConfigError(f"probe lambda {p} outside the lambda window")

    out_tbl = raw.get("output", {})
    out_dir = out_override if out_override is not None else out_tbl.get("dir")
    svg = out_tbl.get("svg", True) if svg_override is None else svg_override
    return CampaignConfig(
        descriptor=descriptor,
        n_interior=n_interior,
        continuation=cont,
        newton=newton,
        seeds=tuple(seeds),
        probes=probes,
        out_dir=out_dir,
        svg=bool(svg),
        profile_stride=int(out_tbl.get("profile_stride", 10)),
    )


@dataclass(frozen=True)
class EvolveJob:
    code: str
    lam: float
    cfg: EvolveConfig


def load_evolve(path) -> EvolveJob:
    raw = _read(path)
    ev = raw.get("evolve")
    if not ev:
        raise ConfigError("config has no [evolve] table")
    cfg = EvolveConfig(
        dt=float(ev.get("dt", 1e-4)),
        t_max=float(ev.get("t_max", 50.0)),
        steady_tol=float(ev.get("steady_tol", 1e-9)),
        snapshot_every=int(ev.get("snapshot_every", 200)),
    )
    return EvolveJob(code=str(ev["code"]), lam=float(ev["lambda"]), cfg=cfg)
