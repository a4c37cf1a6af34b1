"""Symmetric tridiagonal kernels: Thomas solves, inertia counts, Sturm bisection.

Everything downstream (Newton corrections, Morse indices, fold/branch-point
detection, kernel vectors for branch switching) reduces to operations on
symmetric tridiagonal matrices, so these routines work on raw ``(diag, off)``
arrays and are kept free of any problem-specific state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TridiagonalSym",
    "SingularTridiagonalError",
    "solve",
    "matvec",
    "ldl_pivots",
    "count_below",
    "det_sign",
    "smallest_eigenvalues",
    "eigenvalue_by_index",
    "has_eigenvalue_within",
    "inverse_iteration",
]

_TINY = 1e-300


class SingularTridiagonalError(RuntimeError):
    """Elimination hit a pivot below the configured threshold."""


@dataclass(frozen=True, eq=False)
class TridiagonalSym:
    """Symmetric tridiagonal matrix stored as main diagonal and off diagonal."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.diag, dtype=float))
        o = np.atleast_1d(np.asarray(self.off, dtype=float)) if np.size(self.off) else np.empty(0)
        if o.shape != (max(d.size - 1, 0),):
            raise ValueError("off-diagonal length must be len(diag) - 1")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "off", o)

    @property
    def n(self) -> int:
        return self.diag.size

    def shifted(self, shift: float) -> "TridiagonalSym":
        return TridiagonalSym(self.diag - shift, self.off)

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        if self.off.size:
            a += np.diag(self.off, 1) + np.diag(self.off, -1)
        return a


def matvec(diag: np.ndarray, off: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = diag * x
    if off.size:
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
    return y


def solve(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray, pivot_tol: float = 0.0) -> np.ndarray:
    """Thomas elimination for a symmetric tridiagonal system.

    Raises :class:`SingularTridiagonalError` when any pivot magnitude falls at
    or below ``pivot_tol`` (a zero pivot signals proximity to a bifurcation
    point, which callers treat as a structural event, not a crash).
    """
    n = diag.size
    if rhs.shape != (n,):
        raise ValueError("rhs length must match diag")
    if n == 1:
        if abs(diag[0]) <= pivot_tol:
            raise SingularTridiagonalError("1x1 pivot below threshold")
        return rhs / diag[0]
    c = np.empty(n - 1)
    d = np.empty(n)
    piv = diag[0]
    if abs(piv) <= pivot_tol:
        raise SingularTridiagonalError("zero pivot at row 0")
    c[0] = off[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, n - 1):
        piv = diag[i] - off[i - 1] * c[i - 1]
        if abs(piv) <= pivot_tol:
            raise SingularTridiagonalError(f"zero pivot at row {i}")
        c[i] = off[i] / piv
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / piv
    piv = diag[n - 1] - off[n - 2] * c[n - 2]
    if abs(piv) <= pivot_tol:
        raise SingularTridiagonalError(f"zero pivot at row {n - 1}")
    d[n - 1] = (rhs[n - 1] - off[n - 2] * d[n - 2]) / piv
    x = np.empty(n)
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def ldl_pivots(diag: np.ndarray, off: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """Pivots of the LDL^T factorization of (T - shift*I).

    The sequence of pivot signs is the Sturm sequence: the number of negative
    pivots equals the number of eigenvalues of T strictly below ``shift``
    (Sylvester inertia). Zero pivots are nudged to +-1e-300 so the recurrence
    can continue; they do not affect the count for generic shifts.
    """
    n = diag.size
    piv = np.empty(n)
    d = diag[0] - shift
    piv[0] = d
    for i in range(1, n):
        if abs(d) < _TINY:
            d = _TINY if d >= 0.0 else -_TINY
        d = diag[i] - shift - off[i - 1] * off[i - 1] / d
        piv[i] = d
    return piv


def count_below(diag: np.ndarray, off: np.ndarray, shift: float) -> int:
    """Number of eigenvalues strictly below ``shift`` (Sturm/inertia count)."""
    cnt = 0
    d = diag[0] - shift
    if d < 0.0:
        cnt += 1
    for i in range(1, diag.size):
        if abs(d) < _TINY:
            d = _TINY if d >= 0.0 else -_TINY
        d = diag[i] - shift - off[i - 1] * off[i - 1] / d
        if d < 0.0:
            cnt += 1
    return cnt


def det_sign(diag: np.ndarray, off: np.ndarray) -> int:
    """Sign of det(T) from the parity of negative LDL^T pivots (0 if a pivot vanishes)."""
    piv = ldl_pivots(diag, off)
    if np.any(piv == 0.0):
        return 0
    return -1 if (np.sum(piv < 0.0) % 2) else 1


def _gershgorin(diag: np.ndarray, off: np.ndarray) -> tuple[float, float]:
    r = np.zeros(diag.size)
    if off.size:
        r[:-1] += np.abs(off)
        r[1:] += np.abs(off)
    return float(np.min(diag - r)), float(np.max(diag + r))


def eigenvalue_by_index(diag: np.ndarray, off: np.ndarray, index: int, tol: float = 0.0) -> float:
    """The ``index``-th smallest eigenvalue (0-based) by Sturm bisection."""
    n = diag.size
    if not 0 <= index < n:
        raise ValueError(f"eigenvalue index {index} out of range for n={n}")
    lo, hi = _gershgorin(diag, off)
    lo -= 1e-12 * max(1.0, abs(lo))
    hi += 1e-12 * max(1.0, abs(hi))
    if tol <= 0.0:
        tol = 1e-14 * max(abs(lo), abs(hi), 1.0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if count_below(diag, off, mid) <= index:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def smallest_eigenvalues(diag: np.ndarray, off: np.ndarray, k: int, tol: float = 0.0) -> np.ndarray:
    """The k smallest eigenvalues, ascending, by repeated Sturm bisection."""
    return np.array([eigenvalue_by_index(diag, off, i, tol) for i in range(k)])


def has_eigenvalue_within(diag: np.ndarray, off: np.ndarray, center: float, radius: float) -> bool:
    """True when some eigenvalue lies in (center - radius, center + radius)."""
    return count_below(diag, off, center + radius) != count_below(diag, off, center - radius)


def inverse_iteration(
    diag: np.ndarray,
    off: np.ndarray,
    shift: float,
    iters: int = 8,
    v0: np.ndarray | None = None,
) -> np.ndarray:
    """Eigenvector for the eigenvalue nearest ``shift`` by shifted inverse iteration.

    The shift is nudged off the eigenvalue so the Thomas solve stays regular;
    the starting vector is deterministic so downstream output is reproducible.
    """
    n = diag.size
    scale = float(np.max(np.abs(diag)) + (np.max(np.abs(off)) if off.size else 0.0))
    eps = 1e-10 * max(scale, 1.0)
    v = np.ones(n) if v0 is None else np.array(v0, dtype=float)
    v /= np.linalg.norm(v)
    shifted = diag - (shift + eps)
    for _ in range(iters):
        try:
            w = solve(shifted, off, v, pivot_tol=0.0)
        except SingularTridiagonalError:
            shifted = diag - (shift + 3.0 * eps)
            w = solve(shifted, off, v, pivot_tol=0.0)
        nw = np.linalg.norm(w)
        if nw == 0.0 or not np.isfinite(nw):
            break
        v = w / nw
    # orient deterministically: largest-magnitude entry positive
    imax = int(np.argmax(np.abs(v)))
    if v[imax] < 0.0:
        v = -v
    return v
