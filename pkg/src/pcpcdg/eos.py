"""Equations of state h(p, rho) for relativistic perfect fluids.

Four closures are provided: the ideal gas with constant adiabatic index,
and the Mathews, Sokolov and Ryu approximations to the relativistic
Synge gas.  All of them depend on ``p`` and ``rho`` only through ``p/rho``.

Inputs may be scalars or numpy arrays; outputs follow numpy broadcasting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

__all__ = [
    "DomainError",
    "EosModel",
    "ConditionResult",
    "ValidationReport",
    "enthalpy",
    "internal_energy",
    "enthalpy_partials",
    "sound_speed_sq",
    "validate_eos",
    "default_sample_grid",
]

_KINDS = {"ideal": K.IDEAL, "mathews": K.MATHEWS, "sokolov": K.SOKOLOV, "ryu": K.RYU}


class DomainError(ValueError):
    """Raised for non-positive pressure/density or invalid EOS parameters."""


@dataclass(frozen=True)
class EosModel:
    """An EOS variant.  ``gamma`` is only meaningful for ``ideal``.

    The ideal-gas index is restricted to (1, 2], where the admissible-state
    characterisation is proven.  ``strict=False`` lifts that restriction so
    that bad closures can still be built and inspected by ``validate_eos``.
    """

    name: str
    gamma: float = 5.0 / 3.0
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.name not in _KINDS:
            raise DomainError(f"unknown EOS {self.name!r}; expected one of {sorted(_KINDS)}")
        if self.name == "ideal":
            if not self.gamma > 1.0:
                raise DomainError(f"ideal EOS needs gamma > 1, got {self.gamma}")
            if self.strict and self.gamma > 2.0:
                raise DomainError(f"ideal EOS gamma must lie in (1, 2], got {self.gamma}")

    @property
    def kind(self) -> int:
        return _KINDS[self.name]

    @property
    def kernel_gamma(self) -> float:
        # non-ideal kernels ignore gamma, but numba wants a float either way
        return float(self.gamma) if self.name == "ideal" else 0.0

    @classmethod
    def ideal(cls, gamma: float, strict: bool = True) -> "EosModel":
        return cls("ideal", float(gamma), strict)

    @classmethod
    def parse(cls, text: str, strict: bool = True) -> "EosModel":
        """Parse ``ideal:<gamma>``, ``ideal``, ``mathews``, ``sokolov`` or ``ryu``."""
        text = text.strip().lower()
        if text.startswith("ideal"):
            _, _, g = text.partition(":")
            try:
                gamma = float(g) if g else 5.0 / 3.0
            except ValueError as exc:
                raise DomainError(f"bad gamma in EOS string {text!r}") from exc
            return cls.ideal(gamma, strict)
        return cls(text)

    def __str__(self) -> str:
        return f"ideal:{self.gamma:.10g}" if self.name == "ideal" else self.name


def _check_positive(p, rho):
    p = np.asarray(p, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(~(p > 0)) or np.any(~(rho > 0)):
        raise DomainError("pressure and density must be positive")
    return p, rho


def _reduced(eos: EosModel, x):
    """(h - 1, dh/dx) as arrays shaped like ``x``."""
    x = np.asarray(x, dtype=float)
    hm1, slope = K.eos_table(eos.kind, eos.kernel_gamma, np.ascontiguousarray(x).ravel())
    return hm1.reshape(x.shape), slope.reshape(x.shape)


def _out(a):
    return a.item() if a.ndim == 0 else a


def enthalpy(eos: EosModel, p, rho):
    p, rho = _check_positive(p, rho)
    hm1, _ = _reduced(eos, p / rho)
    return _out(1.0 + hm1)


def internal_energy(eos: EosModel, p, rho):
    """Specific internal energy e = h - 1 - p/rho."""
    p, rho = _check_positive(p, rho)
    x = p / rho
    hm1, _ = _reduced(eos, x)
    return _out(hm1 - x)


def enthalpy_partials(eos: EosModel, p, rho):
    """Return ``(dh/dp, dh/drho)``."""
    p, rho = _check_positive(p, rho)
    x = p / rho
    _, slope = _reduced(eos, x)
    return _out(slope / rho), _out(-slope * x / rho)


def sound_speed_sq(eos: EosModel, p, rho, check: bool = True):
    """c_s^2 = (dh/drho) / (h (1/rho - dh/dp)).

    With ``check`` the result is asserted to be causal; a failure there
    means the closure itself is broken, not the caller's input.
    """
    p, rho = _check_positive(p, rho)
    x = p / rho
    hm1, slope = _reduced(eos, x)
    h = 1.0 + hm1
    dhdp = slope / rho
    dhdrho = -slope * x / rho
    cs2 = dhdrho / (h * (1.0 / rho - dhdp))
    if check and (np.any(~(cs2 > 0)) or np.any(~(cs2 < 1))):
        raise ArithmeticError(f"EOS {eos} produced a non-causal sound speed")
    return _out(cs2)


# --------------------------------------------------------------------------
# validation by sampling


@dataclass
class ConditionResult:
    name: str
    passed: bool
    worst_margin: float
    where: tuple  # (p, rho) of the worst sample

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<34s} worst margin {self.worst_margin: .3e} at p={self.where[0]:.3e}, rho={self.where[1]:.3e}"


@dataclass
class ValidationReport:
    eos: str
    conditions: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def text(self) -> str:
        return "\n".join([f"EOS {self.eos}"] + ["  " + c.line() for c in self.conditions])


def default_sample_grid(n: int = 25, lo: float = 1e-8, hi: float = 1e4):
    """Logarithmic (p, rho) grid with ``n`` points per axis, flattened."""
    axis = np.logspace(np.log10(lo), np.log10(hi), n)
    P, R = np.meshgrid(axis, axis, indexing="ij")
    return P.ravel(), R.ravel()


def _worst(name, margin, p, rho, tol=0.0):
    i = int(np.argmin(margin))
    return ConditionResult(name, bool(margin[i] >= tol), float(margin[i]), (float(p[i]), float(rho[i])))


def validate_eos(eos: EosModel, sample_grid=None) -> ValidationReport:
    """Check the structural EOS conditions on a sample of (p, rho) pairs.

    Margins are made dimensionless so that one tolerance fits all scales.
    Failures are reported, never raised.
    """
    p, rho = default_sample_grid() if sample_grid is None else (np.asarray(s, float) for s in sample_grid)
    p, rho = _check_positive(p, rho)
    x = p / rho
    hm1, slope = _reduced(eos, x)
    h = 1.0 + hm1
    out = []

    # h >= sqrt(1 + x^2) + x, written without cancellation in the cold limit
    m6 = (hm1 - x - x * x / (np.sqrt(1.0 + x * x) + 1.0)) / h
    out.append(_worst("h >= x + sqrt(1+x^2)", m6, p, rho, tol=-1e-14))

    # dh/drho < 0 and h (1/rho - dh/dp) < dh/drho ; both scaled by rho/h
    m10a = slope * x / h
    m10b = (h * (slope - 1.0) - slope * x) / h
    out.append(_worst("dh/drho < 0", m10a, p, rho, tol=np.finfo(float).tiny))
    out.append(_worst("h (1/rho - dh/dp) < dh/drho", m10b, p, rho, tol=np.finfo(float).tiny))

    with np.errstate(divide="ignore", invalid="ignore"):
        cs2 = slope * x / (h * (slope - 1.0))
    cs2 = np.where(np.isfinite(cs2), cs2, -1.0)
    out.append(_worst("c_s^2 > 0", cs2, p, rho, tol=np.finfo(float).tiny))
    out.append(_worst("c_s^2 < 1", 1.0 - cs2, p, rho, tol=np.finfo(float).tiny))

    # limits of e along geometric pressure sequences at every sampled rho
    rhos = np.unique(rho)
    ks = np.arange(-14, 15, dtype=float)
    R, KK = np.meshgrid(rhos, ks, indexing="ij")
    Pseq = R * 10.0**KK
    xs = Pseq / R
    e = _reduced(eos, xs)[0] - xs
    mono = np.min(np.diff(e, axis=1) / np.maximum(e[:, 1:], 1e-300), axis=1)
    out.append(_worst("e increasing in p", mono, Pseq[:, 0], rhos, tol=np.finfo(float).tiny))
    # e(rho 1e-14) should be tiny and e(rho 1e14) huge
    m_lo = 1e-10 - e[:, 0]
    m_hi = np.log10(np.maximum(e[:, -1], 1e-300)) - 10.0
    out.append(_worst("e -> 0 as p -> 0", m_lo / 1e-10, Pseq[:, 0], rhos))
    out.append(_worst("e -> inf as p -> inf", m_hi, Pseq[:, -1], rhos))
    return ValidationReport(str(eos), out)
