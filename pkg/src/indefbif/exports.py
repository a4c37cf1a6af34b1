"""Diagram persistence: per-branch CSV, events/census tables, SVG, summary.

All numeric output uses 12-significant-digit %g formatting and contains no
timestamps or environment state, so identical diagrams export byte-identical
files.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .campaign import BifurcationDiagram
from .continuation import Branch
from .spectral import local_direction

__all__ = ["export_csv", "export_svg", "report_summary", "write_branch_file"]

_FMT = "%.12g"


def _g(x) -> str:
    return _FMT % float(x)


def _branch_header(diagram: BifurcationDiagram, branch: Branch) -> list[str]:
    cfg = diagram.config
    lines = [
        "# indefbif branch file v1",
        f"# weight: {json.dumps(diagram.descriptor.to_dict(), sort_keys=True)}",
        f"# grid: n_interior={diagram.grid.n_interior}",
        f"# provenance: {branch.provenance.label() if branch.provenance else 'unknown'}",
    ]
    if cfg is not None:
        cc = cfg.continuation
        lines.append(
            "# continuation: "
            f"ds_init={_g(cc.ds_init)} ds_min={_g(cc.ds_min)} ds_max={_g(cc.ds_max)} "
            f"lambda_window=({_g(cc.lambda_window[0])},{_g(cc.lambda_window[1])}) "
            f"max_steps={cc.max_steps}"
        )
        lines.append(
            f"# newton: tol={_g(cfg.newton.tol_newton)} max_iter={cfg.newton.max_iter}"
        )
    lines.append(f"# exit: {branch.exit_reason}")
    return lines


def write_branch_file(
    diagram: BifurcationDiagram, branch: Branch, path: Path, profile_stride: int = 10
) -> None:
    """One CSV per branch plus a profile sidecar with full u vectors every
    ``profile_stride`` steps."""
    rows = ["step,lambda,uprime0,morse,code,residual_norm"]
    for k, p in enumerate(branch.points):
        morse = "" if p.morse_index is None else str(p.morse_index)
        code = "" if p.bump_code is None else p.bump_code
        rows.append(
            f"{k},{_g(p.lam)},{_g(p.uprime0)},{morse},{code},{_g(p.residual_norm)}"
        )
    path.write_text("\n".join(_branch_header(diagram, branch) + rows) + "\n")
    sidecar = path.with_name(path.stem + "_u.csv")
    srows = ["step,lambda," + ",".join(f"u{i+1}" for i in range(diagram.grid.n_interior))]
    for k, p in enumerate(branch.points):
        if k % profile_stride == 0 or k == len(branch.points) - 1:
            srows.append(f"{k},{_g(p.lam)}," + ",".join(_g(v) for v in p.u))
    sidecar.write_text("\n".join(srows) + "\n")


def export_csv(diagram: BifurcationDiagram, out_dir) -> list[Path]:
    """Write branch files, the event table, and the census table.

    Returns the written paths. The events file records kind, lambda, u'(0)
    and owning branch; the census file one row per (probe, solution).
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written: list[Path] = []
    stride = diagram.config.profile_stride if diagram.config else 10
    branches = list(diagram.branches)
    if diagram.trivial_branch is not None:
        branches = [diagram.trivial_branch] + branches
    for br in branches:
        name = "branch_trivial.csv" if br.branch_id < 0 else f"branch_{br.branch_id:03d}.csv"
        path = out / name
        try:
            write_branch_file(diagram, br, path, stride)
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc
        written.append(path)

    ev_rows = ["kind,lambda,uprime0,branch_id"]
    for bid, ev in diagram.all_events():
        ev_rows.append(f"{ev.kind},{_g(ev.lam)},{_g(ev.uprime0)},{bid}")
    ev_path = out / "events.csv"
    ev_path.write_text("\n".join(ev_rows) + "\n")
    written.append(ev_path)

    c_rows = ["probe_lambda,uprime0,morse,code,max_u,residual_norm"]
    for lam in sorted(diagram.census):
        for p in diagram.census[lam]:
            morse = "" if p.morse_index is None else str(p.morse_index)
            code = "" if p.bump_code is None else p.bump_code
            c_rows.append(
                f"{_g(lam)},{_g(p.uprime0)},{morse},{code},{_g(p.max_u)},{_g(p.residual_norm)}"
            )
    c_path = out / "census.csv"
    c_path.write_text("\n".join(c_rows) + "\n")
    written.append(c_path)

    s_path = out / "summary.txt"
    s_path.write_text(report_summary(diagram))
    written.append(s_path)
    return written


def _axes_window(diagram: BifurcationDiagram, axes) -> tuple[float, float, float, float]:
    if axes is not None:
        return axes
    lam_lo = math.inf
    lam_hi = -math.inf
    y_lo = math.inf
    y_hi = -math.inf
    for br in diagram.branches:
        lams = br.lam_values()
        ys = br.uprime0_values()
        lam_lo = min(lam_lo, float(lams.min()))
        lam_hi = max(lam_hi, float(lams.max()))
        y_lo = min(y_lo, float(ys.min()))
        y_hi = max(y_hi, float(ys.max()))
    if not math.isfinite(lam_lo):
        lam_lo, lam_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    pad_x = 0.05 * max(lam_hi - lam_lo, 1e-6)
    pad_y = 0.05 * max(y_hi - y_lo, 1e-6)
    return lam_lo - pad_x, lam_hi + pad_x, y_lo - pad_y, y_hi + pad_y


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#17becf", "#bcbd22", "#7f7f7f")


def export_svg(diagram: BifurcationDiagram, path, axes=None, width=720, height=540) -> Path:
    """Standalone SVG: one polyline per branch, circles at folds, squares at
    branch points, axes labeled lambda and u'(0). Deterministic output."""
    lam_lo, lam_hi, y_lo, y_hi = _axes_window(diagram, axes)
    ml, mr, mt, mb = 56.0, 16.0, 16.0, 44.0
    pw, ph = width - ml - mr, height - mt - mb

    def sx(lam):
        return ml + pw * (lam - lam_lo) / (lam_hi - lam_lo)

    def sy(y):
        return mt + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_g(ml)}" y="{_g(mt)}" width="{_g(pw)}" height="{_g(ph)}" '
        'fill="none" stroke="#222222" stroke-width="1"/>',
    ]
    # axis ticks: 6 per axis
    for i in range(6):
        lam = lam_lo + (lam_hi - lam_lo) * i / 5.0
        x = sx(lam)
        parts.append(
            f'<line x1="{_g(x)}" y1="{_g(mt + ph)}" x2="{_g(x)}" y2="{_g(mt + ph + 5)}" '
            'stroke="#222222" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_g(x)}" y="{_g(mt + ph + 18)}" font-size="11" '
            f'text-anchor="middle" font-family="monospace">{lam:.4g}</text>'
        )
        y = y_lo + (y_hi - y_lo) * i / 5.0
        parts.append(
            f'<line x1="{_g(ml - 5)}" y1="{_g(sy(y))}" x2="{_g(ml)}" y2="{_g(sy(y))}" '
            'stroke="#222222" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_g(ml - 8)}" y="{_g(sy(y) + 4)}" font-size="11" '
            f'text-anchor="end" font-family="monospace">{y:.4g}</text>'
        )
    parts.append(
        f'<text x="{_g(ml + pw / 2)}" y="{_g(height - 8)}" font-size="13" '
        'text-anchor="middle" font-family="monospace">lambda</text>'
    )
    parts.append(
        f'<text x="14" y="{_g(mt + ph / 2)}" font-size="13" text-anchor="middle" '
        f'font-family="monospace" transform="rotate(-90 14 {_g(mt + ph / 2)})">u\'(0)</text>'
    )
    for br in diagram.branches:
        color = _PALETTE[br.branch_id % len(_PALETTE)]
        pts = [(sx(p.lam), sy(p.uprime0)) for p in br.points]
        if len(pts) == 1:
            x, y = pts[0]
            parts.append(
                f'<circle cx="{_g(x)}" cy="{_g(y)}" r="3" fill="{color}"/>'
            )
        else:
            coords = " ".join(f"{_g(x)},{_g(y)}" for x, y in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.4"/>'
            )
    for bid, ev in diagram.all_events():
        x, y = sx(ev.lam), sy(ev.uprime0)
        if ev.kind == "fold":
            parts.append(
                f'<circle cx="{_g(x)}" cy="{_g(y)}" r="4" fill="none" '
                'stroke="#000000" stroke-width="1.3"/>'
            )
        elif ev.kind == "branch_point":
            parts.append(
                f'<rect x="{_g(x - 3.5)}" y="{_g(y - 3.5)}" width="7" height="7" '
                'fill="none" stroke="#000000" stroke-width="1.3"/>'
            )
    parts.append("</svg>")
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text("\n".join(parts) + "\n")
    return p


def _branch_segments(branch: Branch):
    """Split the branch at its events; yield (code, morse, lam_range) per segment."""
    cuts = [0] + [ev.step_index + 1 for ev in branch.events] + [len(branch.points)]
    for a, b in zip(cuts[:-1], cuts[1:]):
        seg = branch.points[a:b]
        if not seg:
            continue
        # label by the classified deep end of the segment (most negative lam)
        labeled = [p for p in seg if p.bump_code is not None]
        pick = min(labeled, key=lambda p: p.lam) if labeled else None
        code = pick.bump_code if pick else "?"
        morse = pick.morse_index if pick and pick.morse_index is not None else "?"
        yield code, morse, (min(p.lam for p in seg), max(p.lam for p in seg))


def report_summary(diagram: BifurcationDiagram) -> str:
    """Text report: local directions, per-branch type transitions, census."""
    lines = []
    d = local_direction(diagram.descriptor)
    head = f"weight {diagram.descriptor.label()}  D1 = {_g(d.d1)}"
    if d.d2 is not None:
        head += f"  D2 = {_g(d.d2)}"
    head += f"  ({d.regime} bifurcation at lambda = pi^2)"
    lines.append(head)
    lines.append(f"grid n_interior = {diagram.grid.n_interior}")
    lines.append("")
    for br in diagram.branches:
        prov = br.provenance.label() if br.provenance else "?"
        lines.append(f"branch {br.branch_id} [{prov}] exit={br.exit_reason}")
        segs = list(_branch_segments(br))
        # transitions: consecutive segments across each event
        for i, ev in enumerate(br.events):
            if i + 1 < len(segs):
                c0, m0, _ = segs[i]
                c1, m1, _ = segs[i + 1]
                lines.append(
                    f"  {c0}({m0}) -> {c1}({m1}) across {ev.kind} at lambda ~ {ev.lam:.4f}"
                )
        if not br.events and segs:
            c0, m0, (lo, hi) = segs[0]
            lines.append(f"  {c0}({m0}) on lambda in [{lo:.4f}, {hi:.4f}]")
    lines.append("")
    if diagram.census:
        lines.append("census:")
        for lam in sorted(diagram.census):
            entries = ", ".join(
                f"{p.bump_code or '?'}({p.morse_index if p.morse_index is not None else '?'})"
                for p in diagram.census[lam]
            )
            lines.append(f"  lambda = {_g(lam)}: {len(diagram.census[lam])} solutions: {entries}")
    lines.append("")
    lines.append(f"components of positive solutions: {len(diagram.components)}")
    for k, comp in enumerate(diagram.components):
        lines.append(f"  component {k}: branches {sorted(comp)}")
    if diagram.failures:
        lines.append("")
        lines.append("failures:")
        for f in diagram.failures:
            lines.append(f"  [{f.stage}] {f.detail}")
    return "\n".join(lines) + "\n"
