"""Compiled pointwise kernels: EOS closure, pressure recovery, physical flux.

Everything in here works on flat float64 arrays so that the vectorised
Python layers (``eos``, ``state``, ``solver``) can hand over large batches
of quadrature-point states in one call.

EOS kind codes: 0 ideal, 1 Mathews, 2 Sokolov, 3 Ryu.  Every closure is a
function of the reduced pressure ``x = p / rho`` only, and we carry
``h - 1`` rather than ``h`` so that cold states keep full relative accuracy.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

IDEAL = 0
MATHEWS = 1
SOKOLOV = 2
RYU = 3

# recovery status codes
OK = 0
BAD_INPUT = 1
NO_CONVERGENCE = 2

MAX_ITER = 200
REL_TOL = 1e-12


@njit(cache=True, inline="always")
def hm1_and_slope(kind, gamma, x):
    """Return ``(h - 1, dh/dx)`` at reduced pressure ``x``."""
    if kind == IDEAL:
        g = gamma / (gamma - 1.0)
        return g * x, g
    elif kind == MATHEWS:
        s = math.sqrt(2.25 * x * x + 1.0)
        return 2.5 * x + 2.25 * x * x / (s + 1.0), 2.5 + 2.25 * x / s
    elif kind == SOKOLOV:
        s = math.sqrt(4.0 * x * x + 1.0)
        return 2.0 * x + 4.0 * x * x / (s + 1.0), 2.0 + 4.0 * x / s
    else:
        den = 3.0 * x + 2.0
        return (12.0 * x * x + 5.0 * x) / den, 2.0 * (18.0 * x * x + 24.0 * x + 5.0) / (den * den)


@njit(cache=True)
def eos_table(kind, gamma, x):
    n = x.size
    hm1 = np.empty(n)
    slope = np.empty(n)
    for i in range(n):
        a, b = hm1_and_slope(kind, gamma, x[i])
        hm1[i] = a
        slope[i] = b
    return hm1, slope


@njit(cache=True, inline="always")
def _residual(kind, gamma, D, M2, E, EmM, EpM, tau, p):
    """Pressure-equation residual f(p) and f'(p).

    f(p) = D (W - 1) + D W (h - 1) - (E - D) - p, which equals the textbook
    function  D h u - (E + p) u^2  divided by u^2 (u = 1/W), rearranged so
    that no term is formed as a difference of O(E) quantities.
    """
    S = E + p
    r = math.sqrt((EmM + p) * (EpM + p))  # sqrt(S^2 - |m|^2)
    W = S / r
    wm1 = M2 / ((S + r) * r)
    rho = D / W
    x = p / rho
    hm1, hp = hm1_and_slope(kind, gamma, x)
    f = D * wm1 + D * W * hm1 - tau - p
    r3 = r * r * r
    dW = -M2 / r3
    drho = D * M2 / (W * W * r3)
    df = D * (1.0 + hm1) * dW + W * W * hp * (1.0 - x * drho) - 1.0
    # size of the rounding noise in f: a few ulps of its largest term
    noise = 8e-16 * (D * W * (1.0 + hm1) + abs(tau) + p)
    return f, df, noise


@njit(cache=True, inline="always")
def cold_guess(kind, gamma, D, M2, E):
    """Pressure estimate from  E + p = D W + g p W^2  (exact for an ideal gas
    with g = gamma/(gamma-1) once W is right), W frozen at two successive
    estimates starting from p = 0."""
    g = gamma / (gamma - 1.0) if kind == IDEAL else 3.0
    p = 0.0
    for _ in range(2):
        S = E + p
        W2 = S * S / ((S - math.sqrt(M2)) * (S + math.sqrt(M2)))
        pn = (E - D * math.sqrt(W2)) / (g * W2 - 1.0)
        if not pn > 0.0:
            break
        p = pn
    return p


@njit(cache=True)
def recover_point(kind, gamma, D, mx, my, E, guess):
    """Solve for pressure at one state.  Returns ``(p, status, iterations)``."""
    M2 = mx * mx + my * my
    M = math.sqrt(M2)
    if not (D > 0.0) or not (E > 0.0):
        return math.nan, BAD_INPUT, 0
    EmM = E - M
    EpM = E + M
    if not (EmM > 0.0) or E - math.sqrt(D * D + M2) < -1e-12 * E:
        return math.nan, BAD_INPUT, 0
    tau = E - D
    # f(0) = E (D - r0) / r0, negative for admissible input; D - r0 is taken
    # as a difference of squares
    r0 = math.sqrt(EmM * EpM)
    f0 = E * (D * D - EmM * EpM) / ((D + r0) * r0) if M2 > 0.0 else -tau
    if f0 >= 0.0:
        # q(U) is at rounding level: the root sits at the origin
        return 1e-300, OK, 0
    # For closures obeying h >= x + sqrt(1 + x^2) the root lies below E, so
    # [0, E] is a valid bracket without evaluating f(E).  Ideal gases with
    # gamma > 2 do not obey it and get an explicit doubling search.
    lo = 0.0
    hi = E
    if kind == IDEAL and gamma > 2.0:
        fhi, _, _ = _residual(kind, gamma, D, M2, E, EmM, EpM, tau, hi)
        k = 0
        while fhi <= 0.0:
            lo = hi
            hi *= 2.0
            fhi, _, _ = _residual(kind, gamma, D, M2, E, EmM, EpM, tau, hi)
            k += 1
            if k > 2000:
                return math.nan, NO_CONVERGENCE, k
    p = guess
    if not (p > lo and p < hi):
        p = 0.5 * (lo + hi)
    width = hi - lo
    for it in range(1, MAX_ITER + 1):
        f, df, noise = _residual(kind, gamma, D, M2, E, EmM, EpM, tau, p)
        if abs(f) <= noise:
            # f is at its own rounding level, so further iterates would only
            # chase noise; one last Newton step still refines p
            if df > 0.0:
                pn = p - f / df
                if pn > lo and pn < hi:
                    return pn, OK, it
            return p, OK, it
        if f < 0.0:
            lo = p
        else:
            hi = p
        if df > 0.0:
            pn = p - f / df
        else:
            pn = -1.0
        stalled = hi - lo > 0.5 * width
        width = hi - lo
        if not (pn > lo and pn < hi) or (stalled and it % 2 == 0):
            pn = 0.5 * (lo + hi)
        if abs(pn - p) <= REL_TOL * pn or hi - lo <= 4e-16 * hi:
            return pn, OK, it
        p = pn
    return p, NO_CONVERGENCE, MAX_ITER


@njit(cache=True)
def recover_batch(kind, gamma, U, dim, guess):
    """Recover pressures for ``U`` of shape (n, 2 + dim).

    ``guess`` may be empty; otherwise it holds one warm-start value per row.
    Returns ``(p, status)``; ``status`` is the first failing row's code and
    ``bad`` its index (or -1).
    """
    n = U.shape[0]
    p = np.empty(n)
    use_guess = guess.size == n
    for i in range(n):
        D = U[i, 0]
        mx = U[i, 1]
        my = U[i, 2] if dim == 2 else 0.0
        E = U[i, 1 + dim]
        if use_guess:
            g = guess[i]
        else:
            g = cold_guess(kind, gamma, D, mx * mx + my * my, E)
        pi, st, _ = recover_point(kind, gamma, D, mx, my, E, g)
        if st != OK:
            return p, st, i
        p[i] = pi
    return p, OK, -1


@njit(cache=True)
def flux_batch(kind, gamma, U, dim, guess):
    """Physical fluxes along every axis for ``U`` of shape (n, 2 + dim).

    Returns ``(F, p, status, bad)`` with ``F`` of shape (n, dim, 2 + dim).
    """
    n = U.shape[0]
    nv = 2 + dim
    F = np.empty((n, dim, nv))
    p, st, bad = recover_batch(kind, gamma, U, dim, guess)
    if st != OK:
        return F, p, st, bad
    for i in range(n):
        D = U[i, 0]
        E = U[i, 1 + dim]
        pi = p[i]
        S = E + pi
        for a in range(dim):
            va = U[i, 1 + a] / S
            F[i, a, 0] = D * va
            for b in range(dim):
                F[i, a, 1 + b] = U[i, 1 + b] * va
            F[i, a, 1 + a] += pi
            F[i, a, 1 + dim] = U[i, 1 + a]
    return F, p, OK, -1


@njit(cache=True, inline="always")
def _qv(D, mx, my, E):
    return E - math.sqrt(D * D + mx * mx + my * my)


@njit(cache=True)
def pcp_scale(C, V, eps):
    """Two-pass PCP scaling of flat cell coefficients C (cells, modes, comps).

    V holds the control-point values (cells, points, comps); it is
    overwritten.  Returns (limited, theta1, theta2, min_D, min_q) with the minima taken
    over the post-limit control-point values.
    """
    nc, nm, nv = C.shape
    npt = V.shape[1]
    out = C.copy()
    th1 = np.ones(nc)
    th2 = np.ones(nc)
    min_D = np.inf
    min_q = np.inf
    for c in range(nc):
        vals = V[c]
        Db = C[c, 0, 0]
        Dmin = np.inf
        for p in range(npt):
            Dmin = min(Dmin, vals[p, 0])
        t1 = 1.0
        if Dmin < eps:
            t1 = (Db - eps) / (Db - Dmin)
            t1 = min(max(t1, 0.0), 1.0)
        for p in range(npt):
            vals[p, 0] = Db + t1 * (vals[p, 0] - Db)
        for m in range(1, nm):
            out[c, m, 0] *= t1
        my_bar = C[c, 0, 2] if nv == 4 else 0.0
        qb = _qv(Db, C[c, 0, 1], my_bar, C[c, 0, nv - 1])
        qmin = np.inf
        for p in range(npt):
            myv = vals[p, 2] if nv == 4 else 0.0
            qmin = min(qmin, _qv(vals[p, 0], vals[p, 1], myv, vals[p, nv - 1]))
        t2 = 1.0
        if not (qmin >= eps):
            t2 = (qb - eps) / (qb - qmin)
            if not (t2 == t2):
                t2 = 0.0
            t2 = min(max(t2, 0.0), 1.0)
        for m in range(1, nm):
            for v in range(nv):
                out[c, m, v] *= t2
        th1[c] = t1
        th2[c] = t2
        for p in range(npt):
            d = C[c, 0, 0] + t2 * (vals[p, 0] - C[c, 0, 0])
            a = C[c, 0, 1] + t2 * (vals[p, 1] - C[c, 0, 1])
            b = my_bar + t2 * ((vals[p, 2] if nv == 4 else 0.0) - my_bar)
            e = C[c, 0, nv - 1] + t2 * (vals[p, nv - 1] - C[c, 0, nv - 1])
            min_D = min(min_D, d)
            min_q = min(min_q, _qv(d, a, b, e))
    return out, th1, th2, min_D, min_q
