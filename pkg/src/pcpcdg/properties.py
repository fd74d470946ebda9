"""Randomised checks of the structural properties of the admissible set.

Every check draws admissible primitive states (rho and p log-uniform,
speed uniform up to ``1 - 1e-8``, random direction), builds conserved
vectors from them and tests one identity or inequality.  Violations are
counted against a slack that is relative to the energy scale of the states
involved, since q(U) is a difference of O(E) quantities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import EosModel
from .state import flux_from_primitive, primitive_to_conserved, q_value

__all__ = ["PropertyResult", "random_primitives", "run_property_suite", "PROPERTY_NAMES"]

PROPERTY_NAMES = (
    "necessity",
    "concavity",
    "convexity",
    "scaling",
    "orthogonal_invariance",
    "lax_friedrichs_splitting",
)


@dataclass(frozen=True)
class PropertyResult:
    """Outcome of one property over ``trials`` samples.

    ``worst_margin`` is the smallest scaled margin seen; a trial counts as
    a violation when its margin is below ``-slack``.
    """

    name: str
    trials: int
    violations: int
    worst_margin: float
    slack: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        tag = "ok  " if self.passed else "FAIL"
        return f"{tag} {self.name:<26} trials={self.trials:<7d} violations={self.violations:<6d} worst margin={self.worst_margin:+.3e}"


def random_primitives(rng: np.random.Generator, n: int, dim: int = 2, lo: float = 1e-8, hi: float = 1e4, vmax: float = 1 - 1e-8):
    rho = 10.0 ** rng.uniform(np.log10(lo), np.log10(hi), n)
    p = 10.0 ** rng.uniform(np.log10(lo), np.log10(hi), n)
    speed = rng.uniform(0.0, vmax, n)
    if dim == 1:
        v = (speed * rng.choice([-1.0, 1.0], n))[:, None]
    else:
        ang = rng.uniform(0.0, 2 * np.pi, n)
        v = np.stack([speed * np.cos(ang), speed * np.sin(ang)], axis=-1)
    return np.column_stack([rho, v, p])


def _scale(u):
    return np.maximum(np.abs(u[..., -1]), 1e-300)


def _result(name, margin, slack):
    return PropertyResult(name, margin.size, int(np.count_nonzero(margin < -slack)), float(margin.min()), slack)


def run_property_suite(eos: EosModel, trials: int = 100_000, seed: int = 0, slack: float = 1e-12, dim: int = 2):
    """Run every property ``trials`` times; returns a list of ``PropertyResult``."""
    rng = np.random.default_rng(seed)
    w0 = random_primitives(rng, trials, dim)
    w1 = random_primitives(rng, trials, dim)
    u0 = primitive_to_conserved(eos, w0)
    u1 = primitive_to_conserved(eos, w1)
    q0, q1 = q_value(u0), q_value(u1)
    out = []

    # D > 0 and q > 0 for anything built from an admissible primitive state
    out.append(_result("necessity", np.minimum(u0[:, 0], q0) / _scale(u0), slack))

    lam = rng.uniform(0.0, 1.0, trials)[:, None]
    mix = lam * u1 + (1 - lam) * u0
    scale = lam[:, 0] * _scale(u1) + (1 - lam[:, 0]) * _scale(u0)
    qm = q_value(mix)
    out.append(_result("concavity", (qm - (lam[:, 0] * q1 + (1 - lam[:, 0]) * q0)) / scale, slack))
    out.append(_result("convexity", np.minimum(mix[:, 0], qm) / scale, slack))

    # q(kU) = k q(U) for k > 0
    k = 10.0 ** rng.uniform(-6, 6, trials)
    out.append(_result("scaling", -np.abs(q_value(k[:, None] * u0) - k * q0) / (k * _scale(u0)), slack))

    # q depends on m only through |m|
    if dim == 1:
        T = rng.choice([-1.0, 1.0], trials)[:, None, None]
    else:
        T = np.linalg.qr(rng.standard_normal((trials, dim, dim)))[0]
    ur = u0.copy()
    ur[:, 1 : 1 + dim] = np.einsum("nij,nj->ni", T, u0[:, 1 : 1 + dim])
    out.append(_result("orthogonal_invariance", -np.abs(q_value(ur) - q0) / _scale(u0), slack))

    # U +- F_i(U)/alpha stays admissible for alpha > 1
    alpha = 1.0 + 10.0 ** rng.uniform(-6, 0, trials)
    worst = np.full(trials, np.inf)
    for axis in range(dim):
        F = flux_from_primitive(eos, w0, axis)
        for sgn in (1.0, -1.0):
            s = u0 + sgn * F / alpha[:, None]
            worst = np.minimum(worst, np.minimum(s[:, 0], q_value(s)) / _scale(u0))
    out.append(_result("lax_friedrichs_splitting", worst, slack))
    return out
