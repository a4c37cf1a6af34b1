"""Independent oracles used to cross-check the production solvers.

Nothing here touches the package's Newton/Thomas/continuation stack:

* ``shoot_discrete`` solves the same centered-difference boundary value
  problem by forward recurrence shooting plus bisection on the first unknown,
  with no linear algebra at all.
* ``shoot_ode`` integrates the continuum ODE with RK4 and bisects on u'(0);
  agreement with the finite-difference solution is limited by the O(h^2)
  discretization error, so it is compared at that level.
* ``dense_negative_count`` / ``dense_eigenvalues`` go through LAPACK on the
  dense matrix.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg


def dense_eigenvalues(diag, off, k=None):
    t = np.diag(diag).astype(float)
    if len(diag) > 1:
        t += np.diag(off, 1) + np.diag(off, -1)
    w = scipy.linalg.eigvalsh(t)
    return w if k is None else w[:k]


def dense_negative_count(diag, off):
    return int(np.sum(dense_eigenvalues(diag, off) < 0.0))


def fd_jacobian(res_func, u, eps=1e-6):
    """Central finite-difference Jacobian of a residual map."""
    n = u.size
    jac = np.zeros((n, n))
    for i in range(n):
        up = u.copy()
        um = u.copy()
        up[i] += eps
        um[i] -= eps
        jac[:, i] = (res_func(up) - res_func(um)) / (2.0 * eps)
    return jac


def shoot_discrete(lam, avals, h, slope_guess, bracket_width=0.5, max_expand=60):
    """Solve the centered-difference BVP by recurrence shooting.

    From u_0 = 0, u_1 = s*h the interior recurrence
        u_{i+1} = 2 u_i - u_{i-1} - h^2 (lam u_i + a_i u_i^2)
    is marched to u_{n+1}; bisection on s drives the terminal miss u_{n+1}
    to zero. Returns the interior vector u_1..u_n.
    """
    n = avals.size

    def march(s):
        u = np.empty(n + 2)
        u[0] = 0.0
        u[1] = s * h
        for i in range(1, n + 1):
            ui = u[i]
            if abs(ui) > 1e10:
                return None, np.sign(ui) * np.inf
            u[i + 1] = 2.0 * ui - u[i - 1] - h * h * (lam * ui + avals[i - 1] * ui * ui)
        return u[1:-1], u[n + 1]

    def miss(s):
        return march(s)[1]

    s0 = slope_guess
    m0 = miss(s0)
    scale = max(abs(s0), 1.0)
    w = 1e-7 * scale
    lo = hi = s0
    mlo = mhi = m0
    # expand geometrically so the bracket catches the sign change nearest to
    # the guess (distinct solutions can sit close together in slope)
    for _ in range(max_expand):
        m = miss(s0 - w)
        if np.sign(m) != np.sign(m0):
            lo, mlo = s0 - w, m
            hi, mhi = s0, m0
            break
        m = miss(s0 + w)
        if np.sign(m) != np.sign(m0):
            lo, mlo = s0, m0
            hi, mhi = s0 + w, m
            break
        w *= 2.0
        if w > bracket_width * scale:
            raise RuntimeError("discrete shooting could not bracket the boundary miss")
    else:
        raise RuntimeError("discrete shooting could not bracket the boundary miss")
    if lo > hi:
        lo, hi = hi, lo
        mlo, mhi = mhi, mlo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        m = miss(mid)
        if m == 0.0:
            lo = hi = mid
            break
        if np.sign(m) == np.sign(mlo):
            lo, mlo = mid, m
        else:
            hi, mhi = mid, m
    u, _ = march(0.5 * (lo + hi))
    return u


def shoot_ode(descriptor, lam, n_interior, slope_guess, substeps=6, bracket_width=0.5):
    """RK4 shooting for -u'' = lam*u + a(x)*u^2 with bisection on u'(0).

    Integrates with ``substeps`` RK4 stages per grid cell so the returned
    samples land exactly on the interior nodes.
    """
    h = 1.0 / (n_interior + 1)
    dt = h / substeps
    total = (n_interior + 1) * substeps

    def rhs(x, y):
        u, v = y
        return np.array([v, -(lam * u + float(descriptor.evaluate(x)) * u * u)])

    def integrate(p):
        y = np.array([0.0, p])
        nodes = np.empty(n_interior)
        x = 0.0
        for k in range(total):
            k1 = rhs(x, y)
            k2 = rhs(x + 0.5 * dt, y + 0.5 * dt * k1)
            k3 = rhs(x + 0.5 * dt, y + 0.5 * dt * k2)
            k4 = rhs(x + dt, y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            x += dt
            if abs(y[0]) > 1e10:
                return None, np.sign(y[0]) * np.inf
            if (k + 1) % substeps == 0 and (k + 1) // substeps <= n_interior:
                nodes[(k + 1) // substeps - 1] = y[0]
        return nodes, y[0]

    def miss(p):
        return integrate(p)[1]

    p0 = slope_guess
    m0 = miss(p0)
    scale = max(abs(p0), 1.0)
    w = 1e-6 * scale
    lo = hi = p0
    mlo = mhi = m0
    for _ in range(60):
        m = miss(p0 - w)
        if np.sign(m) != np.sign(m0):
            lo, mlo = p0 - w, m
            hi, mhi = p0, m0
            break
        m = miss(p0 + w)
        if np.sign(m) != np.sign(m0):
            lo, mlo = p0, m0
            hi, mhi = p0 + w, m
            break
        w *= 2.0
        if w > bracket_width * scale:
            raise RuntimeError("ODE shooting could not bracket the boundary miss")
    else:
        raise RuntimeError("ODE shooting could not bracket the boundary miss")
    if lo > hi:
        lo, hi = hi, lo
        mlo, mhi = mhi, mlo
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        m = miss(mid)
        if m == 0.0:
            lo = hi = mid
            break
        if np.sign(m) == np.sign(mlo):
            lo, mlo = mid, m
        else:
            hi, mhi = mid, m
    nodes, _ = integrate(0.5 * (lo + hi))
    return nodes
