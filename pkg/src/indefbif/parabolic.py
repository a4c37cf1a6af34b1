"""Method-of-lines evolution of u_t - u_xx = lam*u + a(x)*u^2 and its steady states.

The stepper is first-order semi-implicit: diffusion and the linear term are
implicit (one symmetric tridiagonal solve per step, prefactored), the
quadratic term is explicit at the old iterate. Started from a discrete
subsolution the map is order-preserving, so trajectories are non-decreasing
up to roundoff; the observed violation is tracked and reported.

Evolving toward a steady state with positive Morse index cannot reach an
arbitrarily small rate: roundoff continuously seeds the unstable modes, so
the rate ||u_{k+1}-u_k||/dt hits a floor and then grows. The loop therefore
stops either below ``steady_tol`` or at a detected stall (rate rebounding off
its running minimum), keeps the best iterate seen, and polishes it with
Newton, which removes both the splitting bias and the accumulated noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded, solve_banded

from .discretization import Grid, Weight
from .nonlinear import (
    NewtonConfig,
    NoConvergenceError,
    SolutionPoint,
    boundary_derivative,
    newton_raw,
)

__all__ = [
    "EvolveConfig",
    "EvolutionState",
    "SubsolutionSpec",
    "SteadyFamily",
    "EvolutionFamily",
    "DecayRow",
    "BlowUpError",
    "EvolutionTimeoutError",
    "NonPositiveError",
    "step",
    "evolve_to_steady",
    "evolve_to_time",
    "single_bump_steady",
    "make_subsolution",
    "build_subsolution",
    "check_monotone",
    "decay_profile",
    "EvolveOutcome",
]


class BlowUpError(RuntimeError):
    """Finite-time blow-up: the iterate exceeded the blow-up threshold."""

    def __init__(self, message: str, state: "EvolutionState"):
        super().__init__(message)
        self.state = state


class EvolutionTimeoutError(RuntimeError):
    """t_max was reached before the trajectory settled."""

    def __init__(self, message: str, state: "EvolutionState"):
        super().__init__(message)
        self.state = state


class NonPositiveError(RuntimeError):
    """A sub-problem solution dipped below the positivity tolerance."""


@dataclass(frozen=True)
class EvolveConfig:
    dt: float = 1e-4
    t_max: float = 50.0
    steady_tol: float = 1e-9          # on ||u_new - u_old||_inf / dt
    blowup_threshold: float = 1e12
    growth_factor_limit: float = 10.0  # per-step growth that triggers dt halving
    dt_min: float = 1e-10
    stall_factor: float = 5.0          # rate rebounding this far off its minimum = stall
    stall_accept: float = 1e-5         # stall only counts as quasi-steady below this
    snapshot_every: int = 200          # steps between retained snapshots


@dataclass(frozen=True, eq=False)
class EvolutionState:
    t: float
    u: np.ndarray
    dt: float
    monotone_violation: float = 0.0


@dataclass(frozen=True, eq=False)
class SubsolutionSpec:
    """Multi-bump initial data: theta_{lam,i} on selected positive intervals, zero elsewhere."""

    bump_code: str
    lam: float
    component_steadies: tuple  # per digit: full-length vector for '1', None for '0'


@dataclass(frozen=True)
class SteadyFamily:
    """Per-lambda steady states of a given bump code (Newton from the subsolution seed)."""

    code: str


@dataclass(frozen=True)
class EvolutionFamily:
    """Per-lambda evolutions from the bump-code subsolution up to a fixed time."""

    code: str
    t_end: float


@dataclass(frozen=True)
class DecayRow:
    lam: float
    value: float
    missing: bool = False


@dataclass(frozen=True, eq=False)
class EvolveOutcome:
    point: SolutionPoint
    state: EvolutionState
    trajectory_max: float          # boundedness witness: max of |u| over the run
    stalled: bool                  # stopped at the noise floor rather than steady_tol
    snapshots: tuple               # (t, u) pairs retained along the way


class _Stepper:
    """Prefactored solver for (I + dt*(A - lam*I)) u_new = u + dt*a*u^2."""

    def __init__(self, lam: float, weight: Weight, grid: Grid, dt: float):
        self.lam = lam
        self.avals = weight.values
        self.h = grid.h
        self.n = grid.n_interior
        self.set_dt(dt)

    def set_dt(self, dt: float):
        self.dt = dt
        inv_h2 = 1.0 / (self.h * self.h)
        diag = 1.0 + dt * (2.0 * inv_h2 - self.lam)
        off = np.full(self.n - 1, -dt * inv_h2)
        ab = np.zeros((2, self.n))
        ab[0, 1:] = off
        ab[1] = diag
        try:
            self._chol = cholesky_banded(ab)
            self._lu_ab = None
        except LinAlgError:
            # not SPD for extreme lam*dt; fall back to banded LU per solve
            self._chol = None
            self._lu_ab = np.zeros((3, self.n))
            self._lu_ab[0, 1:] = off
            self._lu_ab[1] = diag
            self._lu_ab[2, :-1] = off

    def advance(self, u: np.ndarray) -> np.ndarray:
        rhs = u + self.dt * self.avals * u * u
        if self._chol is not None:
            return cho_solve_banded((self._chol, False), rhs)
        return solve_banded((1, 1), self._lu_ab, rhs)


def step(state: EvolutionState, lam: float, weight: Weight, grid: Grid, dt: float) -> EvolutionState:
    """One semi-implicit step; blow-up is raised before any overflow."""
    stepper = _Stepper(lam, weight, grid, dt)
    u_new = stepper.advance(state.u)
    mx = float(np.max(np.abs(u_new))) if u_new.size else 0.0
    if not np.isfinite(mx) or mx > 1e12:
        raise BlowUpError(f"|u| reached {mx:.3e} at t={state.t + dt:.6g}", state)
    violation = max(state.monotone_violation, float(np.max(state.u - u_new, initial=0.0)))
    return EvolutionState(t=state.t + dt, u=u_new, dt=dt, monotone_violation=violation)


def _run_evolution(
    u0: np.ndarray,
    lam: float,
    weight: Weight,
    grid: Grid,
    cfg: EvolveConfig,
    *,
    t_end: float | None,
    stop_on_steady: bool,
):
    """Shared stepping loop; returns (state, best_u, traj_max, stalled, snapshots)."""
    u = np.asarray(u0, dtype=float).copy()
    if np.min(u, initial=0.0) < 0.0:
        u = np.maximum(u, 0.0)  # initial data for the parabolic flow is nonnegative
    stepper = _Stepper(lam, weight, grid, cfg.dt)
    t = 0.0
    violation = 0.0
    traj_max = float(np.max(np.abs(u), initial=0.0))
    best_rate = math.inf
    best_u = u.copy()
    stalled = False
    snapshots = [(0.0, u.copy())]
    t_stop = cfg.t_max if t_end is None else t_end
    k = 0
    while t < t_stop - 0.5 * stepper.dt:
        u_new = stepper.advance(u)
        mx = float(np.max(np.abs(u_new), initial=0.0))
        if not np.isfinite(mx) or mx > cfg.blowup_threshold:
            raise BlowUpError(
                f"|u| reached {mx:.3e} at t={t + stepper.dt:.6g}",
                EvolutionState(t=t, u=u, dt=stepper.dt, monotone_violation=violation),
            )
        prev_mx = float(np.max(np.abs(u), initial=0.0))
        if prev_mx > 0.0 and mx > cfg.growth_factor_limit * prev_mx:
            if stepper.dt * 0.5 < cfg.dt_min:
                raise BlowUpError(
                    f"growth {mx / prev_mx:.1f}x per step persists at dt_min",
                    EvolutionState(t=t, u=u, dt=stepper.dt, monotone_violation=violation),
                )
            stepper.set_dt(stepper.dt * 0.5)
            continue
        rate = float(np.max(np.abs(u_new - u), initial=0.0)) / stepper.dt
        violation = max(violation, float(np.max(u - u_new, initial=0.0)))
        t += stepper.dt
        u = u_new
        traj_max = max(traj_max, mx)
        k += 1
        if k % cfg.snapshot_every == 0:
            snapshots.append((t, u.copy()))
        if stop_on_steady:
            if rate < best_rate:
                best_rate = rate
                best_u = u.copy()
            if rate < cfg.steady_tol:
                break
            # a rebound off the running minimum is only a quasi-steady stall when
            # that minimum was genuinely small; rebounds at large rates are just
            # transients (or incipient blow-up) and the run must continue
            if rate > cfg.stall_factor * best_rate and best_rate <= cfg.stall_accept * max(
                1.0, float(np.max(np.abs(best_u), initial=0.0))
            ):
                stalled = True
                break
    else:
        if stop_on_steady and t >= t_stop - 0.5 * stepper.dt:
            raise EvolutionTimeoutError(
                f"no steady state by t_max={t_stop:g} (last rate {best_rate:.3e})",
                EvolutionState(t=t, u=u, dt=stepper.dt, monotone_violation=violation),
            )
    if snapshots[-1][0] != t:
        snapshots.append((t, u.copy()))
    state = EvolutionState(t=t, u=u, dt=stepper.dt, monotone_violation=violation)
    return state, best_u, traj_max, stalled, snapshots


def evolve_to_steady(
    u0: np.ndarray,
    lam: float,
    weight: Weight,
    grid: Grid,
    cfg: EvolveConfig | None = None,
    ncfg: NewtonConfig | None = None,
) -> EvolveOutcome:
    """Step until the trajectory settles, then polish with Newton.

    Returns the polished point plus the trajectory maximum (the boundedness
    witness) and the retained snapshots. Blow-up and timeout propagate as
    exceptions carrying the last state.
    """
    cfg = cfg or EvolveConfig()
    ncfg = ncfg or NewtonConfig()
    u0 = np.asarray(u0, dtype=float)
    if float(np.max(np.abs(u0), initial=0.0)) == 0.0:
        zero = np.zeros(grid.n_interior)
        point = SolutionPoint(lam=float(lam), u=zero, uprime0=0.0, residual_norm=0.0)
        state = EvolutionState(t=0.0, u=zero, dt=cfg.dt)
        return EvolveOutcome(point=point, state=state, trajectory_max=0.0, stalled=False,
                             snapshots=((0.0, zero),))
    state, best_u, traj_max, stalled, snapshots = _run_evolution(
        u0, lam, weight, grid, cfg, t_end=None, stop_on_steady=True
    )
    u, rnorm, iters = newton_raw(lam, best_u, weight.values, grid.h, ncfg)
    point = SolutionPoint(
        lam=float(lam), u=u, uprime0=boundary_derivative(u, grid),
        residual_norm=rnorm, newton_iters=iters,
    )
    return EvolveOutcome(point=point, state=state, trajectory_max=max(traj_max, point.max_u),
                         stalled=stalled, snapshots=tuple(snapshots))


def evolve_to_time(
    u0: np.ndarray,
    t_end: float,
    lam: float,
    weight: Weight,
    grid: Grid,
    cfg: EvolveConfig | None = None,
) -> tuple[EvolutionState, tuple]:
    """Plain evolution to a fixed time; returns the final state and snapshots."""
    cfg = cfg or EvolveConfig()
    state, _, _, _, snapshots = _run_evolution(
        np.asarray(u0, dtype=float), lam, weight, grid, cfg, t_end=t_end, stop_on_steady=False
    )
    return state, tuple(snapshots)


def existence_window(
    u0: np.ndarray,
    lam: float,
    weight: Weight,
    grid: Grid,
    cfg: EvolveConfig | None = None,
    t_cap: float = 10.0,
) -> float:
    """Observed existence time: t of blow-up, or t_cap if none occurred.

    Superlinear growth makes trajectories from large data blow up in finite
    time; downstream decay measurements pick their fixed observation time
    inside the smallest observed window over the lam values of interest.
    """
    cfg = cfg or EvolveConfig()
    try:
        state, _ = evolve_to_time(np.asarray(u0, dtype=float), t_cap, lam, weight, grid, cfg)
        return float(state.t)
    except BlowUpError as exc:
        return float(exc.state.t)


def single_bump_steady(
    lam: float,
    interval_index: int,
    weight: Weight,
    grid: Grid,
    cfg: NewtonConfig | None = None,
) -> np.ndarray:
    """Steady state of -u'' = lam*u + a+(x)*u^2 on the i-th positive interval.

    Solved on the grid nodes strictly inside the interval with the flanking
    nodes pinned to zero, so the result has exactly zero discrete residual on
    the full grid away from the two pinned nodes: the multi-bump composition
    is then a discrete subsolution up to roundoff. Returns a full-length
    vector supported on the interval.

    The sine seed is only accurate close to the sub-problem's principal
    eigenvalue, where the bifurcating bump really is sine-shaped with
    amplitude (sigma_sub - lam) / (2 int a+ sin^3); deep lam targets are
    reached by ramping lam down geometrically with Newton warm restarts, so
    the bump stays inside the Newton basin all the way to the quenched
    regime where its peak approaches -lam/max(a+).
    """
    cfg = cfg or NewtonConfig()
    positives = weight.positive_intervals()
    if not 0 <= interval_index < len(positives):
        raise ValueError(f"interval_index {interval_index} out of range")
    interval = positives[interval_index]
    idx = weight.nodes_inside(interval)
    if idx.size < 3:
        raise ValueError("positive interval holds fewer than 3 grid nodes")
    h = grid.h
    left = grid.nodes[idx[0]] - h    # pinned Dirichlet endpoints (within h of the interval ends)
    right = grid.nodes[idx[-1]] + h
    length = right - left
    sigma_sub = (math.pi / length) ** 2
    if lam >= sigma_sub - 1e-9:
        raise ValueError(
            f"lam={lam:g} is not below the sub-problem principal eigenvalue {sigma_sub:g}; "
            "no positive bump state exists there"
        )
    avals_sub = np.maximum(weight.values[idx], 0.0)
    amax = float(np.max(avals_sub))
    if amax <= 0.0:
        raise ValueError("weight is not positive on the requested interval")
    y = (grid.nodes[idx] - left) / length
    psi = np.sin(math.pi * y)
    # slope of the subcritical local branch: amplitude ~ (sigma_sub-lam)/(2 int A sin^3)
    slope = 2.0 * (h / length) * float(np.sum(avals_sub * psi**3))
    depth_target = sigma_sub - lam
    depth = min(max(0.02 * sigma_sub, 1.0), depth_target)
    lam_cur = sigma_sub - depth
    u = (depth / slope) * psi
    while True:
        u, _, _ = newton_raw(lam_cur, u, avals_sub, h, cfg)
        if float(np.max(u)) < 1e-6 * depth / slope:
            raise NoConvergenceError(
                f"sub-problem Newton collapsed to the trivial state at lam={lam_cur:g}"
            )
        if lam_cur <= lam:
            break
        new_depth = min(1.5 * depth, depth_target)
        u = u * (new_depth / depth)  # amplitude tracks (sigma_sub - lam) in both regimes
        depth = new_depth
        lam_cur = lam if depth >= depth_target else sigma_sub - depth
    if float(np.min(u)) < -cfg.tol_pos:
        raise NonPositiveError(
            f"sub-problem solution dips to {np.min(u):.3e} on interval {interval_index}"
        )
    full = np.zeros(grid.n_interior)
    full[idx] = np.maximum(u, 0.0)
    return full


def make_subsolution(
    code: str,
    lam: float,
    weight: Weight,
    grid: Grid,
    cfg: NewtonConfig | None = None,
) -> SubsolutionSpec:
    positives = weight.positive_intervals()
    if len(code) != len(positives):
        raise ValueError(f"code {code!r} has {len(code)} digits, weight has {len(positives)} bumps")
    steadies = tuple(
        single_bump_steady(lam, i, weight, grid, cfg) if d == "1" else None
        for i, d in enumerate(code)
    )
    return SubsolutionSpec(bump_code=code, lam=lam, component_steadies=steadies)


def build_subsolution(spec: SubsolutionSpec, grid: Grid) -> np.ndarray:
    """Concatenate the selected single-bump states; exact zeros elsewhere."""
    u = np.zeros(grid.n_interior)
    for comp in spec.component_steadies:
        if comp is not None:
            u += comp
    return u


def check_monotone(snapshots) -> float:
    """Max over consecutive snapshot pairs and nodes of (u_earlier - u_later).

    Zero (up to roundoff-seeded instability) for evolutions started at a
    subsolution; large for initial data above a steady state.
    """
    worst = 0.0
    for (_, ua), (_, ub) in zip(snapshots[:-1], snapshots[1:]):
        worst = max(worst, float(np.max(ua - ub, initial=0.0)))
    return worst


def _inset_indices(weight: Weight, grid: Grid, regions, inset: float) -> np.ndarray:
    idx: list[np.ndarray] = []
    for interval in regions:
        x = grid.nodes
        idx.append(np.nonzero((x > interval[0] + inset) & (x < interval[1] - inset))[0])
    if not idx:
        return np.empty(0, dtype=int)
    return np.unique(np.concatenate(idx))


def decay_profile(
    lambdas,
    u_source: SteadyFamily | EvolutionFamily,
    weight: Weight,
    grid: Grid,
    cfg: EvolveConfig | None = None,
    ncfg: NewtonConfig | None = None,
    regions=None,
    inset: float | None = None,
) -> list[DecayRow]:
    """Max of the solution over the (inset) regions where decay is expected.

    By default the regions are the negative intervals of the weight, each
    inset by 2h from the endpoints. Note that the boundary layer that the
    adjacent bumps press into a negative interval has width ~ 1/sqrt(|lam|),
    which dwarfs 2h at moderate lam; measurements that want to see the
    interior decay of the solutions should pass an ``inset`` comparable to a
    fixed fraction of the interval width so they stay on genuine compact
    subsets away from the layer.
    """
    cfg = cfg or EvolveConfig()
    ncfg = ncfg or NewtonConfig()
    if regions is None:
        regions = [(s.left, s.right) for s in weight.negative_intervals()]
    if inset is None:
        inset = 2.0 * grid.h
    idx = _inset_indices(weight, grid, regions, inset)
    rows: list[DecayRow] = []
    for lam in lambdas:
        try:
            spec = make_subsolution(u_source.code, lam, weight, grid, ncfg)
            u0 = build_subsolution(spec, grid)
            if isinstance(u_source, SteadyFamily):
                u, _, _ = newton_raw(lam, u0, weight.values, grid.h, ncfg)
                if float(np.min(u)) < -ncfg.tol_pos or float(np.max(u)) <= ncfg.tol_pos:
                    rows.append(DecayRow(lam=float(lam), value=math.nan, missing=True))
                    continue
            else:
                state, _ = evolve_to_time(u0, u_source.t_end, lam, weight, grid, cfg)
                u = state.u
            value = float(np.max(u[idx])) if idx.size else 0.0
            rows.append(DecayRow(lam=float(lam), value=value))
        except (NoConvergenceError, NonPositiveError, BlowUpError, ValueError):
            rows.append(DecayRow(lam=float(lam), value=math.nan, missing=True))
    return rows
