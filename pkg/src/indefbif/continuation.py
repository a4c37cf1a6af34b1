"""Pseudo-arclength path-following with fold and branch-point detection.

Extended unknowns are z = (u, lam). Branches are parametrized by arclength in
the scaled metric

    <z1, z2> = u_scale * (du1 . du2) + dlam1 * dlam2,

with u_scale = 1/n_interior by default (mesh-independent RMS scaling). The
tangent solves the bordered system [J, F_lam; prev_tangent^T] t = (0, 1) and
each step corrects Newton-style on {F(z) = 0, <z - predictor, tangent> = 0},
so quadratic folds are regular points of the extended system.

Event detection runs two independent signatures over every accepted segment:
the sign of the tangent lam-component (folds) and the Sturm count of the
unbordered Jacobian (eigenvalue crossings). A fold flips both, a simple
bifurcation flips only the count; anything else (count jumping by two, or a
tangent flip without a crossing) is ambiguous and makes the tracer halve the
step and rescan, which guards against the spurious events that plague
non-adaptive discretizations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .discretization import Grid, Weight
from .nonlinear import (
    NewtonConfig,
    NoConvergenceError,
    SingularJacobianError,
    SolutionPoint,
    boundary_derivative,
    jacobian_diag_raw,
    newton_solve,
    residual_raw,
)
from .parabolic import single_bump_steady
from .spectral import classify_type_or_none, negative_eigenvalue_count
from .tridiag import count_below, eigenvalue_by_index, inverse_iteration, matvec

__all__ = [
    "ContinuationConfig",
    "Branch",
    "BranchPointEvent",
    "FromZero",
    "Seeded",
    "Switched",
    "Trivial",
    "SingularBorderedError",
    "StepFailedError",
    "BranchStalledError",
    "AmbiguousEventError",
    "SwitchFailedError",
    "extended_tangent",
    "arclength_step",
    "trace_branch",
    "detect_events",
    "branch_switch",
    "seed_multibump",
    "scaled_distance",
]


class SingularBorderedError(RuntimeError):
    """The bordered matrix is numerically singular (an exact bifurcation point)."""


class StepFailedError(RuntimeError):
    """Corrector diverged for this step size."""


class BranchStalledError(RuntimeError):
    """Step size underflowed ds_min; the partial branch is attached."""

    def __init__(self, message: str, branch: "Branch"):
        super().__init__(message)
        self.branch = branch


class AmbiguousEventError(RuntimeError):
    """Both event signatures flipped in one segment; rescan with a smaller step."""


class SwitchFailedError(RuntimeError):
    """A branch-switch seed converged back to the parent branch."""


@dataclass(frozen=True)
class ContinuationConfig:
    ds_init: float = 0.1
    ds_min: float = 1e-6
    ds_max: float = 2.0
    lambda_window: tuple[float, float] = (-60.0, 13.0)
    max_steps: int = 3000
    u_scale: float | None = None       # default 1/n_interior
    refine_dlambda: float = 1e-4       # branch-point refinement target
    max_ambiguous_retries: int = 6
    loop_factor: float = 10.0          # closed-loop detection radius, in units of ds
    easy_iters: int = 3                # corrector iterations that count as "easy"
    easy_streak: int = 4               # easy steps before ds doubles

    def __post_init__(self):
        if not 0 < self.ds_min <= self.ds_init <= self.ds_max:
            raise ValueError("require 0 < ds_min <= ds_init <= ds_max")
        if self.lambda_window[0] >= self.lambda_window[1]:
            raise ValueError("lambda_window must be (min, max) with min < max")


@dataclass(frozen=True)
class FromZero:
    sigma: float

    def label(self) -> str:
        return f"from_zero sigma={self.sigma:.6g}"


@dataclass(frozen=True)
class Seeded:
    code: str
    lam: float
    direction: int = 0

    def label(self) -> str:
        d = {1: " dir=+1", -1: " dir=-1", 0: ""}[self.direction]
        return f"seeded code={self.code} lambda={self.lam:g}{d}"


@dataclass(frozen=True)
class Switched:
    parent_branch: int
    event_lam: float
    side: int

    def label(self) -> str:
        return f"switched parent={self.parent_branch} event_lambda={self.event_lam:.6g} side={self.side:+d}"


@dataclass(frozen=True)
class Trivial:
    def label(self) -> str:
        return "trivial"


@dataclass(frozen=True, eq=False)
class BranchPointEvent:
    kind: str                  # "fold" | "branch_point" | "ambiguous"
    lam: float
    u: np.ndarray
    uprime0: float
    step_index: int
    count_before: int
    count_after: int


@dataclass(eq=False)
class Branch:
    points: list = field(default_factory=list)
    tangents: list = field(default_factory=list)
    events: list = field(default_factory=list)
    provenance: object = None
    step_sizes: list = field(default_factory=list)   # ds used to reach points[k+1]
    exit_reason: str = ""
    stalled: bool = False
    branch_id: int = -1

    def lam_values(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    def uprime0_values(self) -> np.ndarray:
        return np.array([p.uprime0 for p in self.points])

    def reversed_glued(self, other: "Branch") -> "Branch":
        """This branch reversed, then ``other`` appended (both start at the same point)."""
        pts = list(reversed(self.points)) + other.points[1:]
        tans = [-t for t in reversed(self.tangents)] + other.tangents[1:]
        steps = list(reversed(self.step_sizes)) + [other.step_sizes[0] if other.step_sizes else 0.0]
        steps += other.step_sizes[1:]
        nrev = len(self.points)
        events = [
            replace(e, step_index=nrev - 1 - e.step_index,
                    count_before=e.count_after, count_after=e.count_before)
            for e in self.events
        ] + [replace(e, step_index=e.step_index + nrev - 1) for e in other.events]
        events.sort(key=lambda e: e.step_index)
        return Branch(
            points=pts, tangents=tans, events=events, provenance=other.provenance,
            step_sizes=steps, exit_reason=f"{self.exit_reason}|{other.exit_reason}",
            stalled=self.stalled or other.stalled,
        )


def _u_scale(grid: Grid, cfg: ContinuationConfig) -> float:
    return cfg.u_scale if cfg.u_scale is not None else 1.0 / grid.n_interior


def scaled_inner(du1, dl1, du2, dl2, u_scale: float) -> float:
    return float(u_scale * np.dot(du1, du2) + dl1 * dl2)


def scaled_distance(p: SolutionPoint, q: SolutionPoint, u_scale: float) -> float:
    du = p.u - q.u
    dl = p.lam - q.lam
    return math.sqrt(max(scaled_inner(du, dl, du, dl, u_scale), 0.0))


def _banded(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return ab


def bordered_solve(
    diag: np.ndarray,
    off: np.ndarray,
    bcol: np.ndarray,
    crow: np.ndarray,
    d: float,
    f: np.ndarray,
    g: float,
) -> tuple[np.ndarray, float]:
    """Solve [[T, b], [c^T, d]] (x, xi) = (f, g) by block elimination.

    T is symmetric tridiagonal; two banded solves plus one pass of iterative
    refinement keep the result accurate even when T itself is poorly
    conditioned near folds (the full bordered matrix stays regular there).
    """
    ab = _banded(diag, off)
    try:
        v = solve_banded((1, 1), ab, bcol)
        w = solve_banded((1, 1), ab, f)
    except (LinAlgError, ValueError) as exc:
        raise SingularBorderedError(f"tridiagonal block is singular: {exc}") from exc
    denom = d - float(np.dot(crow, v))
    scale = abs(d) + float(np.max(np.abs(crow), initial=0.0)) + 1.0
    if not np.isfinite(denom) or abs(denom) < 1e-14 * scale:
        raise SingularBorderedError(f"bordered pivot {denom:.3e} below threshold")
    xi = (g - float(np.dot(crow, w))) / denom
    x = w - xi * v
    # one refinement pass against the full bordered residual
    r1 = f - (matvec(diag, off, x) + xi * bcol)
    r2 = g - (float(np.dot(crow, x)) + d * xi)
    try:
        dw = solve_banded((1, 1), ab, r1)
    except (LinAlgError, ValueError) as exc:
        raise SingularBorderedError(f"refinement solve failed: {exc}") from exc
    dxi = (r2 - float(np.dot(crow, dw))) / denom
    dx = dw - dxi * v
    if np.all(np.isfinite(dx)) and np.isfinite(dxi):
        x = x + dx
        xi = xi + dxi
    return x, xi


def extended_tangent(
    point: SolutionPoint,
    prev_tangent: np.ndarray,
    weight: Weight,
    grid: Grid,
    u_scale: float | None = None,
) -> np.ndarray:
    """Unit tangent (du, dlam) continuing ``prev_tangent`` through ``point``.

    Solves [J, dF/dlam; prev^T] t = (0, 1) in the scaled metric and
    normalizes; orientation keeps <t, prev> > 0.
    """
    n = grid.n_interior
    us = u_scale if u_scale is not None else 1.0 / n
    prev = np.asarray(prev_tangent, dtype=float)
    if prev.shape != (n + 1,):
        raise ValueError(f"prev_tangent must have length {n + 1}")
    diag = jacobian_diag_raw(point.lam, point.u, weight.values, grid.h)
    off = np.full(n - 1, -1.0 / (grid.h * grid.h))
    du, dlam = bordered_solve(
        diag, off, bcol=-point.u, crow=us * prev[:n], d=float(prev[n]),
        f=np.zeros(n), g=1.0,
    )
    norm = math.sqrt(max(us * float(np.dot(du, du)) + dlam * dlam, 0.0))
    if norm == 0.0 or not np.isfinite(norm):
        raise SingularBorderedError("tangent solve returned a zero/invalid direction")
    t = np.concatenate([du, [dlam]]) / norm
    if scaled_inner(t[:n], t[n], prev[:n], prev[n], us) < 0.0:
        t = -t
    return t


def arclength_step(
    point: SolutionPoint,
    tangent: np.ndarray,
    ds: float,
    weight: Weight,
    grid: Grid,
    cfg: ContinuationConfig,
    ncfg: NewtonConfig,
) -> tuple[SolutionPoint, int]:
    """Predictor along the tangent, then Newton on the bordered system.

    Returns the corrected point and the corrector iteration count; raises
    StepFailedError when the corrector diverges (caller halves ds).
    """
    n = grid.n_interior
    us = _u_scale(grid, cfg)
    t_u = tangent[:n]
    t_l = float(tangent[n])
    u = point.u + ds * t_u
    lam = point.lam + ds * t_l
    u_pred = u.copy()
    lam_pred = lam
    off = np.full(n - 1, -1.0 / (grid.h * grid.h))

    def merit(rvec, gval):
        return max(float(np.max(np.abs(rvec))), abs(gval))

    r = residual_raw(lam, u.copy(), weight.values, grid.h)
    g = scaled_inner(u - u_pred, lam - lam_pred, t_u, t_l, us)
    m = merit(r, g)
    for it in range(1, ncfg.max_iter + 1):
        tol = ncfg.effective_tol(grid.h, float(np.max(np.abs(u), initial=0.0)))
        if float(np.max(np.abs(r))) <= tol and abs(g) <= 10.0 * tol:
            return (
                SolutionPoint(
                    lam=float(lam), u=u, uprime0=boundary_derivative(u, grid),
                    residual_norm=float(np.max(np.abs(r))), newton_iters=it - 1,
                ),
                it - 1,
            )
        diag = jacobian_diag_raw(lam, u, weight.values, grid.h)
        try:
            du, dlam = bordered_solve(
                diag, off, bcol=-u, crow=us * t_u, d=t_l, f=-r, g=-g
            )
        except SingularBorderedError as exc:
            raise StepFailedError(f"bordered solve failed: {exc}") from exc
        damp = 1.0
        while True:
            u_try = u + damp * du
            lam_try = lam + damp * dlam
            r_try = residual_raw(lam_try, u_try.copy(), weight.values, grid.h)
            g_try = scaled_inner(u_try - u_pred, lam_try - lam_pred, t_u, t_l, us)
            m_try = merit(r_try, g_try)
            if m_try < m or m_try <= tol:
                break
            damp *= 0.5
            if damp < ncfg.damping_min:
                raise StepFailedError(f"corrector damping underflow at merit {m:.3e}")
        u, lam, r, g, m = u_try, lam_try, r_try, g_try, m_try
    tol = ncfg.effective_tol(grid.h, float(np.max(np.abs(u), initial=0.0)))
    if float(np.max(np.abs(r))) <= tol and abs(g) <= 10.0 * tol:
        return (
            SolutionPoint(
                lam=float(lam), u=u, uprime0=boundary_derivative(u, grid),
                residual_norm=float(np.max(np.abs(r))), newton_iters=ncfg.max_iter,
            ),
            ncfg.max_iter,
        )
    raise StepFailedError(f"corrector did not converge (merit {m:.3e})")


def _count(point: SolutionPoint, weight: Weight, grid: Grid) -> int:
    return negative_eigenvalue_count(point.lam, point.u, weight, grid)


def _enrich(point: SolutionPoint, count: int, weight: Weight, grid: Grid) -> SolutionPoint:
    code = classify_type_or_none(point, weight, grid)
    return replace(point, morse_index=count, bump_code=str(code) if code is not None else None)


def _segment_signature(t_prev, t_new, c_prev, c_new) -> str:
    fold_flag = float(t_prev[-1]) * float(t_new[-1]) < 0.0
    dcount = c_new - c_prev
    if abs(dcount) >= 2 or (fold_flag and dcount == 0):
        return "ambiguous"
    if fold_flag:
        return "fold"
    if dcount != 0:
        return "branch_point"
    return "none"


def _refine_fold(p0, t0, ds, weight, grid, cfg, ncfg, us) -> tuple[SolutionPoint, np.ndarray]:
    """Bisection in arclength on the sign of the tangent lam-component."""
    s0 = math.copysign(1.0, float(t0[-1]))
    lo, hi = 0.0, 1.0
    best = None
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        try:
            pm, _ = arclength_step(p0, t0, mid * ds, weight, grid, cfg, ncfg)
            tm = extended_tangent(pm, t0, weight, grid, us)
        except (StepFailedError, SingularBorderedError):
            break
        best = (pm, tm)
        if math.copysign(1.0, float(tm[-1])) == s0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) * ds <= 1e-5:
            break
    if best is None:
        raise StepFailedError("fold refinement could not correct any interior point")
    return best


def _refine_branch_point(p0, t0, p1, ds, c0, weight, grid, cfg, ncfg, us) -> SolutionPoint:
    """Bisection in arclength on the Sturm count, to |dlam| <= refine_dlambda."""
    lo, hi = 0.0, 1.0
    lam_lo, lam_hi = p0.lam, p1.lam
    best = p1
    for _ in range(48):
        if abs(lam_hi - lam_lo) <= cfg.refine_dlambda:
            break
        mid = 0.5 * (lo + hi)
        try:
            pm, _ = arclength_step(p0, t0, mid * ds, weight, grid, cfg, ncfg)
        except StepFailedError:
            break
        cm = _count(pm, weight, grid)
        if cm == c0:
            lo, lam_lo = mid, pm.lam
        else:
            hi, lam_hi = mid, pm.lam
            best = pm
    return best


def detect_events(
    p0: SolutionPoint,
    t0: np.ndarray,
    p1: SolutionPoint,
    t1: np.ndarray,
    weight: Weight,
    grid: Grid,
    cfg: ContinuationConfig | None = None,
    ncfg: NewtonConfig | None = None,
    step_index: int = 0,
) -> list[BranchPointEvent]:
    """Scan one accepted segment for fold / simple-bifurcation signatures.

    Raises AmbiguousEventError when the signatures are inconsistent (the
    caller halves ds and rescans).
    """
    cfg = cfg or ContinuationConfig()
    ncfg = ncfg or NewtonConfig()
    us = _u_scale(grid, cfg)
    ds = scaled_distance(p1, p0, us)
    c0 = _count(p0, weight, grid)
    c1 = _count(p1, weight, grid)
    sig = _segment_signature(t0, t1, c0, c1)
    if sig == "ambiguous":
        raise AmbiguousEventError(
            f"count jumped {c0}->{c1} with tangent flip={float(t0[-1]) * float(t1[-1]) < 0.0}"
        )
    if sig == "none":
        return []
    if sig == "fold":
        pm, _ = _refine_fold(p0, t0, ds, weight, grid, cfg, ncfg, us)
    else:
        pm = _refine_branch_point(p0, t0, p1, ds, c0, weight, grid, cfg, ncfg, us)
    return [
        BranchPointEvent(
            kind=sig, lam=pm.lam, u=pm.u, uprime0=pm.uprime0,
            step_index=step_index, count_before=c0, count_after=c1,
        )
    ]


def trace_branch(
    start: SolutionPoint,
    weight: Weight,
    grid: Grid,
    cfg: ContinuationConfig | None = None,
    ncfg: NewtonConfig | None = None,
    *,
    prev_tangent: np.ndarray | None = None,
    initial_tangent: np.ndarray | None = None,
    provenance=None,
    ds_start: float | None = None,
) -> Branch:
    """Follow the branch through ``start`` until window exit, a closed loop,
    max_steps, loss of positivity, or stall (raised with the partial branch).

    ``initial_tangent`` bypasses the first bordered tangent solve (needed when
    starting at a bifurcation-from-zero point where that system is singular);
    otherwise the first tangent continues ``prev_tangent``.
    """
    cfg = cfg or ContinuationConfig()
    ncfg = ncfg or NewtonConfig()
    us = _u_scale(grid, cfg)
    n = grid.n_interior

    if initial_tangent is not None:
        t = np.asarray(initial_tangent, dtype=float)
        norm = math.sqrt(us * float(np.dot(t[:n], t[:n])) + float(t[n]) ** 2)
        t = t / norm
    else:
        if prev_tangent is None:
            prev_tangent = np.concatenate([np.zeros(n), [1.0]])
        t = extended_tangent(start, prev_tangent, weight, grid, us)

    c_start = _count(start, weight, grid)
    branch = Branch(provenance=provenance)
    branch.points.append(_enrich(start, c_start, weight, grid))
    branch.tangents.append(t)
    counts = [c_start]
    ds = ds_start if ds_start is not None else cfg.ds_init
    easy = 0
    arc_length = 0.0
    branch.exit_reason = "max_steps"
    lam_lo, lam_hi = cfg.lambda_window

    for k in range(cfg.max_steps):
        p_prev = branch.points[-1]
        t_prev = branch.tangents[-1]
        ambiguous_retries = 0
        while True:
            try:
                p_new, iters = arclength_step(p_prev, t_prev, ds, weight, grid, cfg, ncfg)
                t_new = extended_tangent(p_new, t_prev, weight, grid, us)
            except (StepFailedError, SingularBorderedError, SingularJacobianError):
                ds *= 0.5
                easy = 0
                if ds < cfg.ds_min:
                    branch.exit_reason = "stalled"
                    branch.stalled = True
                    raise BranchStalledError(
                        f"ds underflow at step {k} (lambda ~ {p_prev.lam:.6g})", branch
                    )
                continue
            c_new = _count(p_new, weight, grid)
            sig = _segment_signature(t_prev, t_new, counts[-1], c_new)
            if sig == "ambiguous" and ambiguous_retries < cfg.max_ambiguous_retries and ds > 2.0 * cfg.ds_min:
                ds *= 0.5
                easy = 0
                ambiguous_retries += 1
                continue
            break

        step_index = len(branch.points) - 1
        if sig == "ambiguous":
            branch.events.append(
                BranchPointEvent(
                    kind="ambiguous", lam=0.5 * (p_prev.lam + p_new.lam), u=p_new.u,
                    uprime0=p_new.uprime0, step_index=step_index,
                    count_before=counts[-1], count_after=c_new,
                )
            )
        elif sig == "fold":
            try:
                pm, _ = _refine_fold(p_prev, t_prev, ds, weight, grid, cfg, ncfg, us)
                branch.events.append(
                    BranchPointEvent(
                        kind="fold", lam=pm.lam, u=pm.u, uprime0=pm.uprime0,
                        step_index=step_index, count_before=counts[-1], count_after=c_new,
                    )
                )
            except StepFailedError:
                branch.events.append(
                    BranchPointEvent(
                        kind="fold", lam=0.5 * (p_prev.lam + p_new.lam), u=p_new.u,
                        uprime0=p_new.uprime0, step_index=step_index,
                        count_before=counts[-1], count_after=c_new,
                    )
                )
        elif sig == "branch_point":
            pm = _refine_branch_point(p_prev, t_prev, p_new, ds, counts[-1], weight, grid, cfg, ncfg, us)
            branch.events.append(
                BranchPointEvent(
                    kind="branch_point", lam=pm.lam, u=pm.u, uprime0=pm.uprime0,
                    step_index=step_index, count_before=counts[-1], count_after=c_new,
                )
            )

        branch.points.append(_enrich(p_new, c_new, weight, grid))
        branch.tangents.append(t_new)
        branch.step_sizes.append(ds)
        counts.append(c_new)
        arc_length += ds

        easy = easy + 1 if iters <= cfg.easy_iters else 0
        if easy >= cfg.easy_streak:
            ds = min(2.0 * ds, cfg.ds_max)
            easy = 0

        if not lam_lo <= p_new.lam <= lam_hi:
            branch.exit_reason = "window"
            break
        if float(np.min(p_new.u)) < -1e-6 * max(1.0, p_new.max_u):
            branch.exit_reason = "left_positive_cone"
            break
        # closed-loop detection: back within loop_factor*ds of the start after
        # having travelled far enough that this cannot be the departure itself
        loop_radius = cfg.loop_factor * ds
        if arc_length > 6.0 * loop_radius and scaled_distance(p_new, branch.points[0], us) < loop_radius:
            branch.exit_reason = "closed_loop"
            break
    return branch


def primary_branch_start(
    weight: Weight,
    grid: Grid,
    s0: float = 0.05,
    ncfg: NewtonConfig | None = None,
) -> tuple[SolutionPoint, np.ndarray]:
    """A point on the positive branch near (pi^2, 0) at sine-amplitude s0,
    plus a takeoff tangent pointing away from the bifurcation point.

    The shooting point is placed with the exact continuous eigenvalue pi^2
    and the local expansion: lam ~ pi^2 + D1*s (or pi^2 + 2*D2*s^2 with the
    first-order branch correction when D1 = 0). Newton then corrects the
    bordered system {F(u, lam) = 0, 2h <u, sin(pi x)> = s0}, whose amplitude
    row stays regular through the bifurcation point, so folds in lam at the
    onset are harmless.
    """
    from .spectral import (
        D1_ZERO_TOL,
        bifurcation_direction_d1,
        bifurcation_direction_d2,
        compute_w1,
    )

    ncfg = ncfg or NewtonConfig()
    n = grid.n_interior
    h = grid.h
    sigma1 = math.pi**2
    psi = np.sin(math.pi * grid.nodes)
    d1 = bifurcation_direction_d1(weight.descriptor)
    if abs(d1) > D1_ZERO_TOL:
        lam = sigma1 + d1 * s0
        u = s0 * psi
        dlam_hint = d1
    else:
        d2 = bifurcation_direction_d2(weight.descriptor)
        xq, w1q = compute_w1(weight.descriptor)
        w1_nodes = np.interp(grid.nodes, xq, w1q)
        lam = sigma1 + 2.0 * d2 * s0 * s0
        u = s0 * (psi + s0 * w1_nodes)
        dlam_hint = 0.0
    crow = 2.0 * h * psi
    off = np.full(n - 1, -1.0 / (h * h))
    for _ in range(ncfg.max_iter):
        r = residual_raw(lam, u.copy(), weight.values, grid.h)
        g = 2.0 * h * float(np.dot(u, psi)) - s0
        tol = ncfg.effective_tol(h, float(np.max(np.abs(u), initial=0.0)))
        if float(np.max(np.abs(r))) <= tol and abs(g) <= 10.0 * tol:
            break
        diag = jacobian_diag_raw(lam, u, weight.values, h)
        du, dlam = bordered_solve(diag, off, bcol=-u, crow=crow, d=0.0, f=-r, g=-g)
        u = u + du
        lam = lam + dlam
    else:
        raise NoConvergenceError("amplitude-pinned Newton did not converge at the onset")
    point = SolutionPoint(
        lam=float(lam), u=u, uprime0=boundary_derivative(u, grid),
        residual_norm=float(np.max(np.abs(residual_raw(lam, u.copy(), weight.values, h)))),
    )
    prev = np.concatenate([psi, [dlam_hint]])
    tangent = extended_tangent(point, prev, weight, grid)
    return point, tangent


def _kernel_vector(lam: float, u: np.ndarray, weight: Weight, grid: Grid) -> np.ndarray:
    """Kernel direction of the Jacobian at a (near-)singular point, by inverse iteration."""
    n = grid.n_interior
    diag = jacobian_diag_raw(lam, u, weight.values, grid.h)
    off = np.full(n - 1, -1.0 / (grid.h * grid.h))
    j = count_below(diag, off, 0.0)
    candidates = []
    if j - 1 >= 0:
        candidates.append(eigenvalue_by_index(diag, off, j - 1))
    if j < n:
        candidates.append(eigenvalue_by_index(diag, off, j))
    shift = min(candidates, key=abs)
    rng = np.random.default_rng(12345)  # fixed seed: deterministic output
    v0 = rng.standard_normal(n)
    phi = inverse_iteration(diag, off, shift, iters=10, v0=v0)
    return phi / float(np.max(np.abs(phi)))


def branch_switch(
    event: BranchPointEvent,
    weight: Weight,
    grid: Grid,
    cfg: ContinuationConfig | None = None,
    ncfg: NewtonConfig | None = None,
) -> tuple[SolutionPoint, SolutionPoint]:
    """Two converged points on the branches crossing at a simple bifurcation.

    Seeds u +- delta*phi (phi the Jacobian kernel) at lam nudged to the
    subcritical side and Newton-corrects both. The nominal perturbation is
    delta = 1e-3*||u|| with a 1e-3 lam nudge; when a seed falls back onto the
    parent branch the perturbation ladder is escalated before giving up.
    """
    if event.kind != "branch_point":
        raise ValueError(f"branch_switch needs a branch_point event, got {event.kind!r}")
    cfg = cfg or ContinuationConfig()
    ncfg = ncfg or NewtonConfig()
    phi = _kernel_vector(event.lam, event.u, weight, grid)
    base_norm = float(np.max(np.abs(event.u)))
    if base_norm == 0.0:
        base_norm = 1.0
    last_error = "no ladder rung attempted"
    # ladder over perturbation size and over both nudge directions: tangential
    # (pitchfork-like) bifurcating branches live on the subcritical side here,
    # but transversal crossings can leave the event toward either lam side
    for factor in (1.0, 10.0, 30.0, 100.0):
        for direction in (-1.0, +1.0):
            delta = 1e-3 * base_norm * factor
            nudge = 1e-3 * factor * direction
            lam_seed = event.lam + nudge
            try:
                parent = newton_solve(lam_seed, event.u, weight, grid, ncfg)
            except (NoConvergenceError, SingularJacobianError) as exc:
                last_error = f"parent correction failed: {exc}"
                continue
            results = []
            ok = True
            for side in (+1, -1):
                try:
                    p = newton_solve(lam_seed, event.u + side * delta * phi, weight, grid, ncfg)
                except (NoConvergenceError, SingularJacobianError) as exc:
                    last_error = f"side {side:+d} Newton failed: {exc}"
                    ok = False
                    break
                if float(np.max(np.abs(p.u - parent.u))) < 0.5 * delta:
                    last_error = f"side {side:+d} converged back to the parent branch"
                    ok = False
                    break
                results.append(p)
            if ok and float(np.max(np.abs(results[0].u - results[1].u))) >= 0.5 * delta:
                return results[0], results[1]
            if ok:
                last_error = "both sides converged to the same solution"
    raise SwitchFailedError(last_error)


def seed_multibump(
    bump_code: str,
    lam: float,
    weight: Weight,
    grid: Grid,
    ncfg: NewtonConfig | None = None,
) -> np.ndarray:
    """Initial iterate for a multi-bump solution: the single-bump steady state
    of the positive-part sub-problem on every interval whose digit is 1."""
    if lam >= 0.0:
        raise ValueError("multi-bump seeding is defined for lam < 0")
    positives = weight.positive_intervals()
    if len(bump_code) != len(positives):
        raise ValueError(
            f"code {bump_code!r} has {len(bump_code)} digits, weight has {len(positives)} bumps"
        )
    if any(c not in "01" for c in bump_code):
        raise ValueError(f"bump code must be a 0/1 string, got {bump_code!r}")
    u0 = np.zeros(grid.n_interior)
    for i, digit in enumerate(bump_code):
        if digit == "1":
            u0 += single_bump_steady(lam, i, weight, grid, ncfg)
    return u0
