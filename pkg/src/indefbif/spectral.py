"""Morse indices, bump-type classification, and local bifurcation directions.

The Morse index of a steady state is the number of negative eigenvalues tau of

    -v'' = lam*v + 2 a(x) u(x) v + tau*v,    v(0) = v(1) = 0,

whose discretization is exactly the Newton Jacobian, so the index is a Sturm
count of that tridiagonal matrix at shift zero.

The local direction of the bifurcation from (pi^2, 0) is classified by

    D1 = -2 int_0^1 a(x) sin^3(pi x) dx

and, when D1 = 0, by

    D2 = -2 int_0^1 a(x) w1(x) sin^2(pi x) dx,

where w1 is the first-order branch correction

    w1(x) = c2 sin(pi x) + (1/pi) int_0^x a(s) sin^2(pi s) sin(pi s - pi x) ds

with c2 fixed by orthogonality of w1 against sin(pi x). The bifurcation to
positive solutions is supercritical when the first nonzero direction is
positive and subcritical when it is negative.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .discretization import Grid, Weight
from .nonlinear import SolutionPoint, jacobian
from .tridiag import count_below, has_eigenvalue_within

__all__ = [
    "BumpCode",
    "BifurcationDirection",
    "NearDegenerateWarning",
    "AmbiguousTypeError",
    "D1NotZeroError",
    "morse_index",
    "negative_eigenvalue_count",
    "classify_type",
    "classify_type_or_none",
    "bifurcation_direction_d1",
    "compute_w1",
    "bifurcation_direction_d2",
    "local_direction",
    "D1_ZERO_TOL",
    "DEFAULT_PANELS",
]

D1_ZERO_TOL = 1e-10
# panel count divisible by 10 so the MuSin kinks at 0.2/0.8 sit on panel edges
DEFAULT_PANELS = 10240


class NearDegenerateWarning(UserWarning):
    """The stability operator has an eigenvalue within 1e-8*(2/h^2) of zero."""


class AmbiguousTypeError(ValueError):
    """Some bump maximum sits within 20% of the classification threshold."""

    def __init__(self, message: str, provisional: str):
        super().__init__(message)
        self.provisional = provisional


class D1NotZeroError(ValueError):
    """w1/D2 are only defined on weights whose first direction vanishes."""


@dataclass(frozen=True)
class BumpCode:
    """Binary string, one digit per positive interval of the weight."""

    digits: str

    def __post_init__(self):
        if not self.digits or any(c not in "01" for c in self.digits):
            raise ValueError(f"bump code must be a nonempty 0/1 string, got {self.digits!r}")

    def __str__(self) -> str:
        return self.digits

    def __len__(self) -> int:
        return len(self.digits)

    @property
    def digit_sum(self) -> int:
        return sum(int(c) for c in self.digits)


def negative_eigenvalue_count(lam: float, u: np.ndarray, weight: Weight, grid: Grid) -> int:
    """Sturm count of negative eigenvalues of the linearization at (lam, u)."""
    jac = jacobian(lam, u, weight, grid)
    return count_below(jac.diag, jac.off, 0.0)


def morse_index(point: SolutionPoint, weight: Weight, grid: Grid) -> int:
    """Morse index of a converged point; warns NearDegenerateWarning at events."""
    jac = jacobian(point.lam, point.u, weight, grid)
    index = count_below(jac.diag, jac.off, 0.0)
    degeneracy_tol = 1e-8 * (2.0 / grid.h**2)
    if has_eigenvalue_within(jac.diag, jac.off, 0.0, degeneracy_tol):
        warnings.warn(
            f"smallest |eigenvalue| below {degeneracy_tol:.3e} at lam={point.lam:.6g}; "
            "the point sits at or near a fold/branch point",
            NearDegenerateWarning,
            stacklevel=2,
        )
    return index


def classify_type(
    point_or_u: SolutionPoint | np.ndarray,
    weight: Weight,
    grid: Grid,
    threshold_fraction: float = 0.3,
) -> BumpCode:
    """Bump code: digit i is 1 iff max of u over the i-th positive interval
    exceeds threshold_fraction times the global maximum.

    Raises AmbiguousTypeError when any interval maximum falls within +-20% of
    the threshold; callers may re-classify at a more negative lam.

    The default threshold sits in the measured gap between the two ratio
    clusters that converged states exhibit on their positive intervals: the
    tail a neighboring bump leaks into a bump-free interval reaches ~0.16 of
    the global max (seven-bump weight at lam = -80), while the smallest
    genuine bump stays above ~0.53.
    """
    u = point_or_u.u if isinstance(point_or_u, SolutionPoint) else np.asarray(point_or_u, float)
    positives = weight.positive_intervals()
    gmax = float(np.max(u)) if u.size else 0.0
    if gmax <= 0.0:
        return BumpCode("0" * len(positives))
    threshold = threshold_fraction * gmax
    digits = []
    ambiguous = []
    for i, interval in enumerate(positives):
        idx = weight.nodes_inside(interval)
        m = float(np.max(u[idx])) if idx.size else 0.0
        digits.append("1" if m > threshold else "0")
        if 0.8 * threshold <= m <= 1.2 * threshold:
            ambiguous.append(i)
    code = "".join(digits)
    if ambiguous:
        raise AmbiguousTypeError(
            f"interval maxima {ambiguous} within 20% of threshold {threshold:.3e}", code
        )
    return BumpCode(code)


def classify_type_or_none(
    point_or_u: SolutionPoint | np.ndarray,
    weight: Weight,
    grid: Grid,
    threshold_fraction: float = 0.3,
) -> BumpCode | None:
    try:
        return classify_type(point_or_u, weight, grid, threshold_fraction)
    except AmbiguousTypeError:
        return None


def _descriptor(weight_or_descriptor):
    return getattr(weight_or_descriptor, "descriptor", weight_or_descriptor)


def _quad_mesh(panels: int) -> np.ndarray:
    if panels < 4096:
        panels = 4096
    if panels % 2:
        panels += 1
    return np.linspace(0.0, 1.0, panels + 1)


def bifurcation_direction_d1(weight_or_descriptor, panels: int = DEFAULT_PANELS) -> float:
    """D1 = -2 int a(x) sin^3(pi x) dx by composite Simpson quadrature."""
    desc = _descriptor(weight_or_descriptor)
    x = _quad_mesh(panels)
    return float(-2.0 * simpson(desc.evaluate(x) * np.sin(math.pi * x) ** 3, x=x))


def compute_w1(
    weight_or_descriptor,
    panels: int = DEFAULT_PANELS,
    d1_zero_tol: float = D1_ZERO_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Samples of w1 on the quadrature mesh, for weights with D1 = 0.

    The nested integral is evaluated with cumulative Simpson feeding Simpson
    on one shared uniform mesh: expanding sin(pi s - pi x) splits the inner
    integral into cos(pi x)*F(x) - sin(pi x)*G(x) with cumulative integrands
    F' = a sin^3 and G' = a sin^2 cos.
    """
    desc = _descriptor(weight_or_descriptor)
    d1 = bifurcation_direction_d1(desc, panels)
    if abs(d1) > d1_zero_tol:
        raise D1NotZeroError(f"|D1| = {abs(d1):.3e} exceeds {d1_zero_tol:.1e}")
    x = _quad_mesh(panels)
    av = desc.evaluate(x)
    s = np.sin(math.pi * x)
    c = np.cos(math.pi * x)
    F = cumulative_simpson(av * s**3, x=x, initial=0.0)
    G = cumulative_simpson(av * s**2 * c, x=x, initial=0.0)
    inner = (c * F - s * G) / math.pi
    c2 = float(-2.0 * simpson(s * inner, x=x))
    return x, c2 * s + inner


def bifurcation_direction_d2(
    weight_or_descriptor,
    panels: int = DEFAULT_PANELS,
    d1_zero_tol: float = D1_ZERO_TOL,
) -> float:
    """D2 = -2 int a(x) w1(x) sin^2(pi x) dx (requires D1 = 0)."""
    desc = _descriptor(weight_or_descriptor)
    x, w1 = compute_w1(desc, panels, d1_zero_tol)
    av = desc.evaluate(x)
    return float(-2.0 * simpson(av * w1 * np.sin(math.pi * x) ** 2, x=x))


@dataclass(frozen=True)
class BifurcationDirection:
    """First nonvanishing local direction at (pi^2, 0): d2 only when d1 is zero."""

    d1: float
    d2: float | None

    @property
    def regime(self) -> str:
        d = self.d1 if abs(self.d1) > D1_ZERO_TOL else (self.d2 or 0.0)
        if d > 0:
            return "supercritical"
        if d < 0:
            return "subcritical"
        return "degenerate"


def local_direction(weight_or_descriptor, panels: int = DEFAULT_PANELS) -> BifurcationDirection:
    desc = _descriptor(weight_or_descriptor)
    d1 = bifurcation_direction_d1(desc, panels)
    if abs(d1) > D1_ZERO_TOL:
        return BifurcationDirection(d1=d1, d2=None)
    return BifurcationDirection(d1=d1, d2=bifurcation_direction_d2(desc, panels))


def musin_d1_closed_form(mu: float) -> float:
    """Closed form of D1 for the MuSin family: -sqrt((5-sqrt5)/2)*(5-sqrt5)^2*(mu-1)/(128 pi)."""
    r5 = math.sqrt(5.0)
    return -math.sqrt(0.5 * (5.0 - r5)) * (5.0 - r5) ** 2 * (mu - 1.0) / (128.0 * math.pi)
