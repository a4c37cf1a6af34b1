"""Residual/Jacobian assembly and damped Newton for -u'' = lam*u + a(x)*u^2.

The discrete residual at interior node i is

    r_i = (-u_{i-1} + 2 u_i - u_{i+1}) / h^2 - lam*u_i - a(x_i)*u_i^2,

with u_0 = u_{n+1} = 0. The Jacobian is symmetric tridiagonal with diagonal
2/h^2 - lam - 2 a u and constant off diagonal -1/h^2; it coincides with the
stability operator whose negative eigenvalues give the Morse index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretization import Grid, Weight
from .tridiag import SingularTridiagonalError, TridiagonalSym, solve

__all__ = [
    "NewtonConfig",
    "SolutionPoint",
    "NoConvergenceError",
    "SingularJacobianError",
    "residual",
    "jacobian",
    "newton_solve",
    "boundary_derivative",
]


class NoConvergenceError(RuntimeError):
    """Newton failed: iteration cap reached or damping underflow."""


class SingularJacobianError(RuntimeError):
    """Tridiagonal solve hit a zero pivot; the iterate sits near a bifurcation point."""


@dataclass(frozen=True)
class NewtonConfig:
    tol_newton: float = 1e-10     # residual max-norm
    max_iter: int = 30
    damping_min: float = 1e-4
    tol_pos: float = 1e-8         # allowed negative undershoot for positive solutions
    tol_floor_eps: float = 20.0   # roundoff floor, in multiples of eps*(2/h^2)*||u||

    def __post_init__(self):
        if self.tol_newton <= 0 or self.max_iter < 1 or not 0 < self.damping_min <= 1:
            raise ValueError("invalid NewtonConfig")

    def effective_tol(self, h: float, u_norm: float) -> float:
        """Acceptance tolerance at mesh width h for an iterate of max-norm u_norm.

        The residual is assembled from terms of size (2/h^2)*||u||, so its
        max-norm cannot be driven below machine-eps times that scale; the
        absolute tolerance is widened accordingly for large solutions.
        """
        floor = self.tol_floor_eps * np.finfo(float).eps * (2.0 / (h * h)) * max(1.0, u_norm)
        return max(self.tol_newton, floor)


@dataclass(frozen=True, eq=False)
class SolutionPoint:
    """One converged solution of the discrete problem.

    ``morse_index`` and ``bump_code`` are None until the spectral layer fills
    them in; ``uprime0`` is the one-sided boundary derivative used as the
    bifurcation-diagram ordinate.
    """

    lam: float
    u: np.ndarray
    uprime0: float
    residual_norm: float
    morse_index: int | None = None
    bump_code: str | None = None
    newton_iters: int = 0

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))

    @property
    def max_u(self) -> float:
        return float(np.max(np.abs(self.u))) if self.u.size else 0.0


def residual_raw(lam: float, u: np.ndarray, avals: np.ndarray, h: float) -> np.ndarray:
    r = 2.0 * u
    r[:-1] -= u[1:]
    r[1:] -= u[:-1]
    r /= h * h
    r -= lam * u + avals * u * u
    return r


def jacobian_diag_raw(lam: float, u: np.ndarray, avals: np.ndarray, h: float) -> np.ndarray:
    return 2.0 / (h * h) - lam - 2.0 * avals * u


def residual(lam: float, u: np.ndarray, weight: Weight, grid: Grid) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_interior,):
        raise ValueError(f"u must have length {grid.n_interior}, got {u.shape}")
    return residual_raw(lam, u.copy(), weight.values, grid.h)


def jacobian(lam: float, u: np.ndarray, weight: Weight, grid: Grid) -> TridiagonalSym:
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_interior,):
        raise ValueError(f"u must have length {grid.n_interior}, got {u.shape}")
    n = grid.n_interior
    return TridiagonalSym(
        jacobian_diag_raw(lam, u, weight.values, grid.h),
        np.full(max(n - 1, 0), -1.0 / (grid.h * grid.h)),
    )


def boundary_derivative(u: np.ndarray, grid: Grid) -> float:
    """Second-order one-sided u'(0) ~ (4 u_1 - u_2) / (2h), using u(0) = 0."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_interior,):
        raise ValueError(f"u must have length {grid.n_interior}, got {u.shape}")
    return float((4.0 * u[0] - u[1]) / (2.0 * grid.h))


def newton_raw(
    lam: float,
    u0: np.ndarray,
    avals: np.ndarray,
    h: float,
    cfg: NewtonConfig,
) -> tuple[np.ndarray, float, int]:
    """Damped Newton on the raw arrays; returns (u, residual max-norm, iterations).

    Damping halves the step until the residual norm decreases and restores
    full steps on the next iteration. Pivot threshold 1e-12*(2/h^2) turns a
    near-singular tridiagonal solve into SingularJacobianError.
    """
    n = avals.size
    u = np.array(u0, dtype=float)
    if u.shape != (n,):
        raise ValueError("u0 length mismatch")
    if not np.all(np.isfinite(u)):
        raise ValueError("u0 must be finite")
    off = np.full(max(n - 1, 0), -1.0 / (h * h))
    pivot_tol = 1e-12 * (2.0 / (h * h))
    r = residual_raw(lam, u.copy(), avals, h)
    rnorm = float(np.max(np.abs(r)))
    for it in range(1, cfg.max_iter + 1):
        tol = cfg.effective_tol(h, float(np.max(np.abs(u), initial=0.0)))
        if rnorm <= tol:
            return u, rnorm, it - 1
        diag = jacobian_diag_raw(lam, u, avals, h)
        try:
            step = solve(diag, off, -r, pivot_tol)
        except SingularTridiagonalError as exc:
            raise SingularJacobianError(str(exc)) from exc
        t = 1.0
        while True:
            u_trial = u + t * step
            r_trial = residual_raw(lam, u_trial.copy(), avals, h)
            rn_trial = float(np.max(np.abs(r_trial)))
            if rn_trial < rnorm or rn_trial <= tol:
                break
            t *= 0.5
            if t < cfg.damping_min:
                raise NoConvergenceError(
                    f"damping underflow at iteration {it}, residual {rnorm:.3e}"
                )
        u, r, rnorm = u_trial, r_trial, rn_trial
    if rnorm <= cfg.effective_tol(h, float(np.max(np.abs(u), initial=0.0))):
        return u, rnorm, cfg.max_iter
    raise NoConvergenceError(f"no convergence after {cfg.max_iter} iterations, residual {rnorm:.3e}")


def newton_solve(
    lam: float,
    u0: np.ndarray,
    weight: Weight,
    grid: Grid,
    cfg: NewtonConfig | None = None,
) -> SolutionPoint:
    """Solve the discrete problem at fixed lam starting from u0."""
    cfg = cfg or NewtonConfig()
    u, rnorm, iters = newton_raw(lam, np.asarray(u0, dtype=float), weight.values, grid.h, cfg)
    return SolutionPoint(
        lam=float(lam),
        u=u,
        uprime0=boundary_derivative(u, grid),
        residual_norm=rnorm,
        newton_iters=iters,
    )
