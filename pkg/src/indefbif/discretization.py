"""Grids, sign-changing weight families, and the discrete Dirichlet Laplacian.

The domain is (0, 1) with homogeneous Dirichlet conditions imposed by row
elimination: only interior nodes are carried, so the negative Laplacian is a
symmetric tridiagonal matrix and Sturm counting applies directly.

Two weight families are built in:

* ``SinDescriptor(n)``: a(x) = sin((2n+1) pi x), which has n+1 positive and n
  negative bumps with sign changes at k/(2n+1).
* ``MuSinDescriptor(mu)``: mu*sin(5 pi x) on [0, 0.2) and (0.8, 1], plain
  sin(5 pi x) on [0.2, 0.8], for mu >= 1. Same sign pattern as SinDescriptor(2).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .tridiag import TridiagonalSym, count_below, eigenvalue_by_index

__all__ = [
    "Grid",
    "SinDescriptor",
    "MuSinDescriptor",
    "SignInterval",
    "Weight",
    "build_grid",
    "sample_weight",
    "neg_laplacian",
    "dirichlet_eigenvalues",
    "exact_dirichlet_eigenvalue",
    "discrete_dirichlet_eigenvalue",
    "descriptor_from_dict",
    "descriptor_from_spec",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform interior mesh on (0, 1): nodes x_i = i*h, i = 1..n_interior."""

    n_interior: int
    h: float
    nodes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))


def build_grid(n_interior: int) -> Grid:
    """Uniform grid with ``n_interior`` interior nodes; requires n_interior >= 3."""
    if n_interior < 3:
        raise ValueError(f"n_interior must be >= 3, got {n_interior}")
    h = 1.0 / (n_interior + 1)
    nodes = h * np.arange(1, n_interior + 1)
    return Grid(n_interior=n_interior, h=h, nodes=nodes)


@dataclass(frozen=True)
class SignInterval:
    left: float
    right: float
    sign: int


@dataclass(frozen=True)
class SinDescriptor:
    """a(x) = sin((2n+1) pi x)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("SinDescriptor requires n >= 1")

    @property
    def positive_count(self) -> int:
        return self.n + 1

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.sin((2 * self.n + 1) * math.pi * np.asarray(x, dtype=float))

    def sign_intervals(self) -> tuple[SignInterval, ...]:
        m = 2 * self.n + 1
        return tuple(
            SignInterval(k / m, (k + 1) / m, 1 if k % 2 == 0 else -1) for k in range(m)
        )

    def to_dict(self) -> dict:
        return {"kind": "sin", "n": self.n}

    def label(self) -> str:
        return f"sin(%d*pi*x)" % (2 * self.n + 1)


@dataclass(frozen=True)
class MuSinDescriptor:
    """mu*sin(5 pi x) on the outer fifths, sin(5 pi x) on [0.2, 0.8]."""

    mu: float

    def __post_init__(self):
        if self.mu < 1.0:
            raise ValueError(f"MuSinDescriptor requires mu >= 1, got {self.mu}")

    @property
    def positive_count(self) -> int:
        return 3

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        base = np.sin(5 * math.pi * x)
        # breakpoints belong to the interior piece; both pieces vanish there
        return np.where((x >= 0.2) & (x <= 0.8), base, self.mu * base)

    def sign_intervals(self) -> tuple[SignInterval, ...]:
        return tuple(
            SignInterval(k / 5, (k + 1) / 5, 1 if k % 2 == 0 else -1) for k in range(5)
        )

    def to_dict(self) -> dict:
        return {"kind": "musin", "mu": self.mu}

    def label(self) -> str:
        return f"musin(mu={self.mu:g})"


WeightDescriptor = SinDescriptor | MuSinDescriptor


def descriptor_from_dict(d: dict) -> WeightDescriptor:
    kind = d.get("kind")
    if kind == "sin":
        return SinDescriptor(n=int(d["n"]))
    if kind == "musin":
        return MuSinDescriptor(mu=float(d["mu"]))
    raise ValueError(f"unknown weight kind {kind!r}")


def descriptor_from_spec(spec: str) -> WeightDescriptor:
    """Parse a weight given as JSON, e.g. '{"kind":"sin","n":2}'."""
    return descriptor_from_dict(json.loads(spec))


@dataclass(frozen=True, eq=False)
class Weight:
    """A weight family sampled on a grid, with its sign-interval decomposition."""

    descriptor: WeightDescriptor
    grid: Grid
    values: np.ndarray
    sign_intervals: tuple[SignInterval, ...]

    def positive_intervals(self) -> tuple[SignInterval, ...]:
        return tuple(s for s in self.sign_intervals if s.sign > 0)

    def negative_intervals(self) -> tuple[SignInterval, ...]:
        return tuple(s for s in self.sign_intervals if s.sign < 0)

    def nodes_inside(self, interval: SignInterval, inset: float = 0.0) -> np.ndarray:
        """Indices of grid nodes strictly inside (left + inset, right - inset)."""
        x = self.grid.nodes
        return np.nonzero((x > interval.left + inset) & (x < interval.right - inset))[0]


def sample_weight(descriptor: WeightDescriptor, grid: Grid) -> Weight:
    return Weight(
        descriptor=descriptor,
        grid=grid,
        values=descriptor.evaluate(grid.nodes),
        sign_intervals=descriptor.sign_intervals(),
    )


def neg_laplacian(grid: Grid) -> TridiagonalSym:
    """Centered second-difference -d^2/dx^2 with Dirichlet rows eliminated."""
    n = grid.n_interior
    inv_h2 = 1.0 / (grid.h * grid.h)
    return TridiagonalSym(np.full(n, 2.0 * inv_h2), np.full(max(n - 1, 0), -inv_h2))


def exact_dirichlet_eigenvalue(m: int) -> float:
    """Continuous spectrum sigma_m = (m pi)^2 of -u'' on (0,1) with u(0)=u(1)=0."""
    return (m * math.pi) ** 2


def discrete_dirichlet_eigenvalue(grid: Grid, m: int) -> float:
    """Closed form (2/h^2)(1 - cos(m pi h)) for the centered stencil."""
    return (2.0 / grid.h**2) * (1.0 - math.cos(m * math.pi * grid.h))


def dirichlet_eigenvalues(grid: Grid, k: int) -> np.ndarray:
    """The k smallest eigenvalues of ``neg_laplacian(grid)``, ascending.

    Computed by Sturm bisection so the result is independent of the dense
    eigensolver used as a cross-check in the test suite. These converge to
    (m pi)^2 at rate O(h^2).
    """
    if not 1 <= k <= grid.n_interior:
        raise ValueError(f"k must be in [1, {grid.n_interior}], got {k}")
    lap = neg_laplacian(grid)
    tol = 1e-13 * (2.0 / grid.h**2)
    return np.array([eigenvalue_by_index(lap.diag, lap.off, i, tol) for i in range(k)])


def trivial_morse_count(grid: Grid, lam: float) -> int:
    """Negative-eigenvalue count of the linearization at u = 0 (A - lam*I)."""
    lap = neg_laplacian(grid)
    return count_below(lap.diag - lam, lap.off, 0.0)
