"""Conserved and primitive states, admissibility, pressure recovery, flux.

Array layout
------------
States are float arrays whose last axis holds the components:

* primitive  ``w = (rho, v_1, ..., v_d, p)``
* conserved  ``U = (D, m_1, ..., m_d, E)``

so ``d = w.shape[-1] - 2``.  Leading axes are arbitrary and are processed
elementwise; scalar-like single states are plain 1-D arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .eos import DomainError, EosModel, _reduced

__all__ = [
    "DEFAULT_EPS",
    "AdmissibilityEps",
    "AdmissibilityError",
    "RecoveryError",
    "primitive_to_conserved",
    "conserved_to_primitive",
    "q_value",
    "is_admissible",
    "recover_pressure",
    "pressure_residual",
    "flux",
    "flux_from_primitive",
    "lax_friedrichs_split",
    "lorentz_factor",
]

DEFAULT_EPS = 1e-13


@dataclass(frozen=True)
class AdmissibilityEps:
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")


class AdmissibilityError(ValueError):
    """A state (or cell average) lies outside the admissible set."""

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class RecoveryError(RuntimeError):
    """The pressure equation could not be solved for an admissible state."""

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


def _dim(a) -> int:
    d = a.shape[-1] - 2
    if d not in (1, 2):
        raise ValueError(f"state vectors need 3 or 4 components, got {a.shape[-1]}")
    return d


def lorentz_factor(v):
    """W for velocity array ``v`` with components on the last axis."""
    v = np.asarray(v, dtype=float)
    v2 = np.sum(v * v, axis=-1)
    return 1.0 / np.sqrt(1.0 - v2)


def primitive_to_conserved(eos: EosModel, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    d = _dim(w)
    rho, v, p = w[..., 0], w[..., 1 : 1 + d], w[..., 1 + d]
    if np.any(~(rho > 0)) or np.any(~(p > 0)):
        raise DomainError("primitive state needs rho > 0 and p > 0")
    v2 = np.sum(v * v, axis=-1)
    if np.any(~(v2 < 1.0)):
        raise DomainError("primitive state needs |v| < 1")
    W = 1.0 / np.sqrt(1.0 - v2)
    hm1, _ = _reduced(eos, p / rho)
    D = rho * W
    U = np.empty_like(w)
    U[..., 0] = D
    U[..., 1 : 1 + d] = (D * (1.0 + hm1) * W)[..., None] * v
    # E = rho h W^2 - p = rho [1 + v^2 W^2 + W^2 (h - 1)] - p
    U[..., 1 + d] = rho * (1.0 + v2 * W * W + W * W * hm1) - p
    return U


def q_value(u) -> np.ndarray:
    """q(U) = E - sqrt(D^2 + |m|^2)."""
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    D, m, E = u[..., 0], u[..., 1 : 1 + d], u[..., 1 + d]
    return E - np.sqrt(D * D + np.sum(m * m, axis=-1))


def is_admissible(u, eps: float | AdmissibilityEps = DEFAULT_EPS):
    """True where D >= eps and q(U) >= eps.  Works elementwise."""
    eps = eps.eps if isinstance(eps, AdmissibilityEps) else eps
    u = np.asarray(u, dtype=float)
    ok = (u[..., 0] >= eps) & (q_value(u) >= eps)
    return ok.item() if np.ndim(ok) == 0 else ok


def _flat(u):
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    return np.ascontiguousarray(u.reshape(-1, 2 + d)), d


def _raise_for(status, bad, shape):
    idx = np.unravel_index(bad, shape) if len(shape) else ()
    if status == K.BAD_INPUT:
        raise AdmissibilityError(f"inadmissible state at index {idx}", idx)
    raise RecoveryError(f"pressure recovery did not converge at index {idx}", idx)


_EMPTY = np.empty(0)


def recover_pressure(eos: EosModel, u, guess=None) -> np.ndarray:
    """Pressure p(U) from the scalar pressure equation.

    Bracketed Newton iteration with bisection fallback.  Raises
    ``AdmissibilityError`` unless D > 0 and q(U) > 0 for every state.
    """
    u = np.asarray(u, dtype=float)
    lead = u.shape[:-1]
    if np.any(~(u[..., 0] > 0)) or np.any(~(q_value(u) > 0)):
        bad = np.flatnonzero(~((u[..., 0] > 0) & (q_value(u) > 0)).ravel())[0]
        _raise_for(K.BAD_INPUT, bad, lead)
    flat, d = _flat(u)
    g = _EMPTY if guess is None else np.ascontiguousarray(np.broadcast_to(guess, lead), float).ravel()
    p, st, bad = K.recover_batch(eos.kind, eos.kernel_gamma, flat, d, g)
    if st != K.OK:
        _raise_for(st, bad, lead)
    p = p.reshape(lead)
    return p.item() if p.ndim == 0 else p


def pressure_residual(eos: EosModel, u, p):
    """The pressure function  D h u - (E + p) u^2  with u = sqrt(1 - v^2).

    Evaluated literally (no cancellation-avoiding rearrangement), for use as
    an independent residual check of ``recover_pressure``.
    """
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    D, m, E = u[..., 0], u[..., 1 : 1 + d], u[..., 1 + d]
    m2 = np.sum(m * m, axis=-1)
    S = E + p
    uu2 = 1.0 - m2 / (S * S)
    uu = np.sqrt(uu2)
    rho = D * uu
    hm1, _ = _reduced(eos, p / rho)
    return D * (1.0 + hm1) * uu - S * uu2


def conserved_to_primitive(eos: EosModel, u, guess=None) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    p = np.asarray(recover_pressure(eos, u, guess))
    D, m, E = u[..., 0], u[..., 1 : 1 + d], u[..., 1 + d]
    S = E + p
    m2 = np.sum(m * m, axis=-1)
    w = np.empty_like(u)
    # rho = D sqrt(1 - v^2) with 1 - v^2 = (S - |m|)(S + |m|)/S^2
    M = np.sqrt(m2)
    w[..., 0] = D * np.sqrt((S - M) * (S + M)) / S
    w[..., 1 : 1 + d] = m / S[..., None]
    w[..., 1 + d] = p
    return w


def flux_from_primitive(eos: EosModel, w, axis: int) -> np.ndarray:
    """F_axis evaluated from a primitive state (``axis`` is 0-based)."""
    w = np.asarray(w, dtype=float)
    d = _dim(w)
    U = primitive_to_conserved(eos, w)
    va = w[..., 1 + axis]
    F = U * va[..., None]
    F[..., 1 + axis] += w[..., 1 + d]
    F[..., 1 + d] = U[..., 1 + axis]
    return F


def flux(eos: EosModel, u, axis: int) -> np.ndarray:
    """Physical flux F_axis(U) with primitives recovered from U (0-based axis)."""
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    if not 0 <= axis < d:
        raise ValueError(f"axis {axis} out of range for d={d}")
    p = np.asarray(recover_pressure(eos, u))
    S = u[..., 1 + d] + p
    va = u[..., 1 + axis] / S
    F = u * va[..., None]
    F[..., 1 + axis] += p
    F[..., 1 + d] = u[..., 1 + axis]
    return F


def lax_friedrichs_split(eos: EosModel, u, axis: int, alpha: float):
    """Return ``(U + F/alpha, U - F/alpha)``."""
    if not alpha >= 1.0:
        raise ValueError("alpha must be >= 1 (the speed of light)")
    u = np.asarray(u, dtype=float)
    F = flux(eos, u, axis) / alpha
    return u + F, u - F
