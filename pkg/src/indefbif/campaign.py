"""Campaign driver: discovery strategy, census, and component bookkeeping.

A campaign (1) traces the trivial branch, (2) shoots onto the positive
component at pi^2 along the kernel direction sin(pi x) and traces it, (3)
switches branches at every detected simple bifurcation, recursively, (4)
Newton-seeds every configured multi-bump code that is not already represented
and traces the resulting isolated folds both ways, and (5) collects a census
of distinct solutions at each probe lam.

Components of the positive-solution set are reconstructed by union-find:
switched branches join their parent, the two traces of one seed are glued
into a single curve, and branches whose detected events coincide in
(lam, u'(0)) are the same curve crossing, so they join too.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .continuation import (
    Branch,
    BranchPointEvent,
    BranchStalledError,
    ContinuationConfig,
    FromZero,
    Seeded,
    SingularBorderedError,
    SwitchFailedError,
    Switched,
    Trivial,
    branch_switch,
    primary_branch_start,
    scaled_distance,
    seed_multibump,
    trace_branch,
)
from .discretization import (
    Grid,
    Weight,
    WeightDescriptor,
    build_grid,
    sample_weight,
    trivial_morse_count,
)
from .nonlinear import (
    NewtonConfig,
    NoConvergenceError,
    SingularJacobianError,
    SolutionPoint,
    newton_solve,
)
from .parabolic import NonPositiveError
from .spectral import classify_type_or_none, negative_eigenvalue_count

__all__ = [
    "SeedSpec",
    "CampaignConfig",
    "CampaignFailure",
    "BifurcationDiagram",
    "run_campaign",
]


@dataclass(frozen=True)
class SeedSpec:
    code: str
    lam: float


@dataclass(frozen=True)
class CampaignConfig:
    descriptor: WeightDescriptor
    n_interior: int = 999
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    seeds: tuple = ()
    probes: tuple = ()
    out_dir: str | None = None
    svg: bool = True
    profile_stride: int = 10
    onset_amplitude: float = 5e-3   # sine amplitude of the first point on the branch
    onset_ds: float = 5e-3          # first arclength steps off the onset
    max_branches: int = 48
    census_dedup_tol: float = 1e-3
    census_min_norm: float = 1e-3
    represented_tol: float = 0.03
    workers: int = 1                # thread pool size for seed preparation


@dataclass(frozen=True)
class CampaignFailure:
    stage: str
    detail: str


@dataclass(eq=False)
class BifurcationDiagram:
    descriptor: WeightDescriptor
    grid: Grid
    weight: Weight
    branches: list = field(default_factory=list)
    trivial_branch: Branch | None = None
    census: dict = field(default_factory=dict)
    components: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    config: CampaignConfig | None = None

    def all_events(self):
        """Flattened (branch_id, event) pairs over the positive branches."""
        out = []
        for br in self.branches:
            for ev in br.events:
                out.append((br.branch_id, ev))
        return out

    def events_of_kind(self, kind: str):
        return [(bid, ev) for bid, ev in self.all_events() if ev.kind == kind]


def _trivial_branch(weight: Weight, grid: Grid, cfg: CampaignConfig) -> Branch:
    lam_lo, lam_hi = cfg.continuation.lambda_window
    n = grid.n_interior
    lams = np.arange(lam_lo, lam_hi + 0.25, 0.5)
    br = Branch(provenance=Trivial(), exit_reason="window")
    zero = np.zeros(n)
    tangent = np.concatenate([np.zeros(n), [1.0]])
    code = "0" * len(weight.positive_intervals())
    for lam in lams:
        br.points.append(
            SolutionPoint(
                lam=float(lam), u=zero, uprime0=0.0, residual_norm=0.0,
                morse_index=trivial_morse_count(grid, float(lam)), bump_code=code,
            )
        )
        br.tangents.append(tangent)
    br.step_sizes = [0.5] * (len(br.points) - 1)
    return br


def _segments_bracketing(branch: Branch, lam: float):
    pts = branch.points
    for k in range(len(pts) - 1):
        a, b = pts[k], pts[k + 1]
        if (a.lam - lam) * (b.lam - lam) <= 0.0 and a.lam != b.lam:
            yield a, b


def _interp_u(a: SolutionPoint, b: SolutionPoint, lam: float) -> np.ndarray:
    theta = (lam - a.lam) / (b.lam - a.lam)
    return a.u + theta * (b.u - a.u)


def _is_represented(point: SolutionPoint, branches, tol: float) -> bool:
    scale = max(1.0, point.max_u)
    for br in branches:
        for a, b in _segments_bracketing(br, point.lam):
            ui = _interp_u(a, b, point.lam)
            if float(np.max(np.abs(ui - point.u))) <= tol * scale:
                return True
    return False


def _away_tangent(p: SolutionPoint, ev: BranchPointEvent, n: int, u_scale: float) -> np.ndarray:
    t = np.concatenate([p.u - ev.u, [p.lam - ev.lam]])
    norm = math.sqrt(u_scale * float(np.dot(t[:n], t[:n])) + float(t[n]) ** 2)
    if norm == 0.0:
        return np.concatenate([np.zeros(n), [-1.0]])
    return t / norm


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.add(a)
        self.add(b)
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return [out[k] for k in sorted(out)]


def _match_events(diagram: BifurcationDiagram, uf: _UnionFind):
    evs = diagram.all_events()
    for i in range(len(evs)):
        bid_i, ei = evs[i]
        for j in range(i + 1, len(evs)):
            bid_j, ej = evs[j]
            if bid_i == bid_j:
                continue
            if abs(ei.lam - ej.lam) <= 0.05 and abs(ei.uprime0 - ej.uprime0) <= 1e-2 * (
                1.0 + abs(ei.uprime0)
            ):
                uf.union(bid_i, bid_j)


def _census_at(
    diagram: BifurcationDiagram, lam: float, cfg: CampaignConfig
) -> list[SolutionPoint]:
    weight, grid = diagram.weight, diagram.grid
    found: list[SolutionPoint] = []
    for br in diagram.branches:
        for a, b in _segments_bracketing(br, lam):
            try:
                pt = newton_solve(lam, _interp_u(a, b, lam), weight, grid, cfg.newton)
            except (NoConvergenceError, SingularJacobianError):
                continue
            if pt.max_u <= cfg.census_min_norm:
                continue
            if float(np.min(pt.u)) < -cfg.newton.tol_pos:
                continue
            count = negative_eigenvalue_count(lam, pt.u, weight, grid)
            code = classify_type_or_none(pt, weight, grid)
            pt = replace(pt, morse_index=count, bump_code=str(code) if code else None)
            dup = False
            for q in found:
                if abs(q.uprime0 - pt.uprime0) <= cfg.census_dedup_tol * (1.0 + abs(pt.uprime0)) and float(
                    np.max(np.abs(q.u - pt.u))
                ) <= cfg.census_dedup_tol * (1.0 + pt.max_u):
                    dup = True
                    break
            if not dup:
                found.append(pt)
    found.sort(key=lambda p: p.uprime0)
    return found


def run_campaign(cfg: CampaignConfig) -> BifurcationDiagram:
    """Run the discovery strategy and assemble the bifurcation diagram.

    Per-branch failures are recorded on the diagram and the campaign
    continues; only a failed shot onto the primary component leaves the
    diagram without positive branches.
    """
    grid = build_grid(cfg.n_interior)
    weight = sample_weight(cfg.descriptor, grid)
    diagram = BifurcationDiagram(descriptor=cfg.descriptor, grid=grid, weight=weight, config=cfg)
    ccfg = cfg.continuation
    ncfg = cfg.newton
    us = ccfg.u_scale if ccfg.u_scale is not None else 1.0 / grid.n_interior
    n = grid.n_interior

    diagram.trivial_branch = _trivial_branch(weight, grid, cfg)

    def add_branch(br: Branch) -> int:
        br.branch_id = len(diagram.branches)
        diagram.branches.append(br)
        return br.branch_id

    def trace_or_partial(start, *, prev_tangent=None, initial_tangent=None, provenance, ds_start=None):
        try:
            return trace_branch(
                start, weight, grid, ccfg, ncfg,
                prev_tangent=prev_tangent, initial_tangent=initial_tangent,
                provenance=provenance, ds_start=ds_start,
            )
        except BranchStalledError as exc:
            diagram.failures.append(
                CampaignFailure(stage="trace", detail=f"{provenance.label()}: {exc}")
            )
            return exc.branch

    # (2) shoot onto the positive component at sigma_1 = pi^2
    try:
        start, takeoff = primary_branch_start(weight, grid, cfg.onset_amplitude, ncfg)
    except (NoConvergenceError, SingularJacobianError, SingularBorderedError) as exc:
        diagram.failures.append(CampaignFailure(stage="onset", detail=str(exc)))
        return diagram
    primary = trace_or_partial(
        start, initial_tangent=takeoff,
        provenance=FromZero(math.pi**2), ds_start=cfg.onset_ds,
    )
    # prepend the bifurcation point itself so the curve meets the trivial axis
    onset = SolutionPoint(
        lam=math.pi**2, u=np.zeros(n), uprime0=0.0, residual_norm=0.0,
        morse_index=None, bump_code=None,
    )
    primary.points.insert(0, onset)
    primary.tangents.insert(0, primary.tangents[0])
    primary.step_sizes.insert(0, cfg.onset_amplitude)
    primary.events = [replace(ev, step_index=ev.step_index + 1) for ev in primary.events]
    add_branch(primary)

    # (3) branch switching at simple bifurcations, recursively over new branches
    handled_events: list[tuple[float, float]] = []

    def drain_switch_queue(queue: list) -> None:
        while queue and len(diagram.branches) < cfg.max_branches:
            parent = queue.pop(0)
            for ev in parent.events:
                if ev.kind != "branch_point":
                    continue
                if any(
                    abs(ev.lam - l0) <= 0.02 and abs(ev.uprime0 - p0) <= 1e-2 * (1.0 + abs(p0))
                    for l0, p0 in handled_events
                ):
                    continue
                handled_events.append((ev.lam, ev.uprime0))
                try:
                    pa, pb = branch_switch(ev, weight, grid, ccfg, ncfg)
                except (SwitchFailedError, NoConvergenceError, SingularJacobianError) as exc:
                    diagram.failures.append(
                        CampaignFailure(stage="switch", detail=f"lam={ev.lam:.6g}: {exc}")
                    )
                    continue
                # both children are always traced: they start delta-close to
                # the parent (and to each other), so a distance-based
                # representation check cannot tell them apart this close to
                # the event; duplicate events are already filtered above
                for side, p in ((+1, pa), (-1, pb)):
                    if len(diagram.branches) >= cfg.max_branches:
                        break
                    child = trace_or_partial(
                        p, prev_tangent=_away_tangent(p, ev, n, us),
                        provenance=Switched(parent.branch_id, ev.lam, side),
                    )
                    add_branch(child)
                    queue.append(child)

    drain_switch_queue([primary])

    # (4) multi-bump seeding of components not already represented; the
    # independent seed solves may run on a thread pool, the traces stay
    # sequential because representation checks depend on discovery order
    def _prepare_seed(seed: SeedSpec):
        u0 = seed_multibump(seed.code, seed.lam, weight, grid, ncfg)
        return newton_solve(seed.lam, u0, weight, grid, ncfg)

    prepared: dict[int, object] = {}
    if cfg.workers > 1 and cfg.seeds:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {i: pool.submit(_prepare_seed, s) for i, s in enumerate(cfg.seeds)}
        for i, fut in futures.items():
            prepared[i] = fut
    for i, seed in enumerate(cfg.seeds):
        if len(diagram.branches) >= cfg.max_branches:
            break
        try:
            if i in prepared:
                pt = prepared[i].result()
            else:
                pt = _prepare_seed(seed)
        except (NoConvergenceError, NonPositiveError, SingularJacobianError, ValueError) as exc:
            diagram.failures.append(
                CampaignFailure(stage="seed", detail=f"{seed.code}@{seed.lam:g}: {exc}")
            )
            continue
        if pt.max_u <= cfg.census_min_norm or float(np.min(pt.u)) < -ncfg.tol_pos:
            diagram.failures.append(
                CampaignFailure(stage="seed", detail=f"{seed.code}@{seed.lam:g}: collapsed")
            )
            continue
        if _is_represented(pt, diagram.branches, cfg.represented_tol):
            continue
        up = trace_or_partial(
            pt, prev_tangent=np.concatenate([np.zeros(n), [1.0]]),
            provenance=Seeded(seed.code, seed.lam, +1),
        )
        down = trace_or_partial(
            pt, prev_tangent=np.concatenate([np.zeros(n), [-1.0]]),
            provenance=Seeded(seed.code, seed.lam, -1),
        )
        merged = down.reversed_glued(up)
        merged.provenance = Seeded(seed.code, seed.lam, 0)
        add_branch(merged)
        drain_switch_queue([merged])

    # (5) census
    for lam in cfg.probes:
        diagram.census[float(lam)] = _census_at(diagram, float(lam), cfg)

    # components
    uf = _UnionFind()
    for br in diagram.branches:
        uf.add(br.branch_id)
        if isinstance(br.provenance, Switched):
            uf.union(br.branch_id, br.provenance.parent_branch)
    _match_events(diagram, uf)
    diagram.components = uf.groups()
    return diagram
