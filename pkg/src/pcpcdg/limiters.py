"""PCP scaling limiter and TVB minmod moment limiter.

The PCP limiter squeezes each cell polynomial towards its average, first
to keep D >= eps and then q(U) >= eps at a set of control points.  Since q
is concave, linear scaling suffices.  Both limiters leave the mode-0
coefficients untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as Kn
from .boundary import Boundaries, pad
from .grid import Basis, QuadratureSet, build_quadrature, half_cell_points
from .state import DEFAULT_EPS, AdmissibilityError

__all__ = [
    "ControlPointSet",
    "control_points",
    "pcp_limit_cell",
    "pcp_limit_array",
    "pcp_limit_solution",
    "tvb_limit_array",
    "tvb_minmod_limit",
    "minmod",
    "Limiter",
]


@dataclass(frozen=True)
class ControlPointSet:
    """Reference coordinates of the control points and basis values there.

    ``lobatto_mask`` marks the Gauss-Lobatto subset (1D) whose weighted sum
    reproduces the cell average; ``lobatto_weights`` are those weights.
    """

    xi: np.ndarray
    eta: np.ndarray | None
    phi: np.ndarray  # (points, modes)
    lobatto_mask: np.ndarray
    lobatto_weights: np.ndarray


def control_points(basis: Basis, quad: QuadratureSet | None = None) -> ControlPointSet:
    quad = quad or build_quadrature(basis.K)
    gl = half_cell_points(quad.lobatto_nodes)
    gs = half_cell_points(quad.gauss_nodes)
    glw = 0.5 * np.concatenate((quad.lobatto_weights, quad.lobatto_weights))
    if basis.dim == 1:
        xi = np.concatenate((gl, gs))
        mask = np.arange(xi.size) < gl.size
        w = np.concatenate((glw, np.zeros(gs.size)))
        return ControlPointSet(xi, None, basis.values(xi), mask, w)
    blocks = [(gl, gs), (gs, gl), (gs, gs)]
    xi = np.concatenate([np.repeat(a, b.size) for a, b in blocks])
    eta = np.concatenate([np.tile(b, a.size) for a, b in blocks])
    mask = np.zeros(xi.size, bool)
    return ControlPointSet(xi, eta, basis.values(xi, eta), mask, np.zeros(xi.size))


def _q(u):
    d = u.shape[-1] - 2
    return u[..., -1] - np.sqrt(u[..., 0] ** 2 + np.sum(u[..., 1 : 1 + d] ** 2, axis=-1))


def _check_averages(avg, eps, where):
    D = avg[..., 0]
    q = _q(avg)
    slack = 1e-14 * np.maximum(1.0, np.abs(avg[..., -1]))
    bad = (D < eps) | (q < eps - slack) | ~np.isfinite(q)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise AdmissibilityError(
            f"cell average outside the admissible set on the {where} mesh at cell {idx}: "
            f"D={D[idx]:.6e}, q={q[idx]:.6e} (limiting requires D >= eps and q >= eps)",
            idx,
        )


# The scaling factors hit eps exactly in real arithmetic, so evaluated
# values can land a few ulps of |E| below it.  These relative cuts are tried
# in turn on the offending cells, ending with the cell average itself.
_SHRINK = (1.0 - 1e-12, 1.0 - 1e-9, 1.0 - 1e-6, 1.0 - 1e-3, 0.5, 0.0)


def _verify(out, th2, phi, eps):
    """Shrink ``out`` in place until evaluated control points clear eps."""
    vals = phi @ out
    for f in _SHRINK:
        bad = (vals[..., 0].min(axis=-1) < eps) | (_q(vals).min(axis=-1) < eps)
        bad &= np.any(out[:, 1:, :] != 0.0, axis=(1, 2))
        if not bad.any():
            break
        out[bad, 1:, :] *= f
        th2[bad] *= f
        vals[bad] = phi @ out[bad]
    return vals


def pcp_limit_array(coeffs: np.ndarray, cps: ControlPointSet, eps: float = DEFAULT_EPS, where: str = "primal"):
    """Limit every cell of ``coeffs`` (cells + (modes, comps)).

    Returns ``(limited, theta1, theta2, stats)`` where ``stats`` holds the
    post-limit minima of D and q over all control points.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    _check_averages(coeffs[..., 0, :], eps, where)
    cells = coeffs.shape[:-2]
    flat = np.ascontiguousarray(coeffs.reshape((-1,) + coeffs.shape[-2:]))
    out, th1, th2, _, _ = Kn.pcp_scale(flat, cps.phi @ flat, float(eps))
    vals = _verify(out, th2, cps.phi, eps)
    stats = {"min_D": float(vals[..., 0].min()), "min_q": float(_q(vals).min())}
    out = out.reshape(coeffs.shape)
    th1, th2 = th1.reshape(cells), th2.reshape(cells)
    return out, th1, th2, stats


def pcp_limit_cell(coeffs: np.ndarray, cps: ControlPointSet, eps: float = DEFAULT_EPS):
    """Single-cell convenience wrapper: returns ``(limited, theta1, theta2)``."""
    out, t1, t2, _ = pcp_limit_array(np.asarray(coeffs, float)[None], cps, eps)
    return out[0], float(t1[0]), float(t2[0])


def pcp_limit_solution(sol, eps: float = DEFAULT_EPS, cps: ControlPointSet | None = None):
    """Apply the PCP limiter independently on both meshes of a ``DgSolution``."""
    cps = cps or control_points(Basis(sol.K, sol.dim))
    p, *_ = pcp_limit_array(sol.primal, cps, eps, "primal")
    d, *_ = pcp_limit_array(sol.dual, cps, eps, "dual")
    return sol.replace(p, d)


# --------------------------------------------------------------------------
# TVB


def minmod(a, b, c):
    s = np.sign(a)
    same = (s == np.sign(b)) & (s == np.sign(c))
    return np.where(same, s * np.minimum(np.minimum(np.abs(a), np.abs(b)), np.abs(c)), 0.0)


def _limit_moment(c1, dplus, dminus, threshold):
    lim = minmod(c1, dplus, dminus)
    keep = np.abs(c1) <= threshold
    new = np.where(keep, c1, lim)
    return new, new != c1


def tvb_limit_array(coeffs, mesh, bcs: Boundaries, dual: bool, K: int, M: float):
    """Component-wise minmod limiting of the first moments on one mesh."""
    if K == 0:
        return coeffs
    dim = coeffs.ndim - 2
    avg = pad(coeffs, mesh, bcs, dual, K)[..., 0, :]
    out = coeffs.copy()
    if dim == 1:
        c = avg[1:-1]
        new, changed = _limit_moment(coeffs[:, 1, :], avg[2:] - c, c - avg[:-2], M * mesh.dx**2)
        out[:, 1, :] = new
        if K == 2:
            out[:, 2, :] = np.where(changed, 0.0, coeffs[:, 2, :])
        return out
    c = avg[1:-1, 1:-1]
    nx, chx = _limit_moment(coeffs[..., 1, :], avg[2:, 1:-1] - c, c - avg[:-2, 1:-1], M * mesh.dx**2)
    ny, chy = _limit_moment(coeffs[..., 2, :], avg[1:-1, 2:] - c, c - avg[1:-1, :-2], M * mesh.dy**2)
    out[..., 1, :] = nx
    out[..., 2, :] = ny
    if K == 2:
        changed = (chx | chy)[..., None, :]
        out[..., 3:, :] = np.where(changed, 0.0, coeffs[..., 3:, :])
    return out


def tvb_minmod_limit(sol, mesh, bcs: Boundaries, M: float):
    p = tvb_limit_array(sol.primal, mesh, bcs, False, sol.K, M)
    d = tvb_limit_array(sol.dual, mesh, bcs, True, sol.K, M)
    return sol.replace(p, d)


@dataclass
class Limiter:
    """The per-stage limiting pipeline: TVB (optional) then PCP (optional).

    ``history`` collects the post-limit control-point minima of every call.
    """

    mesh: object
    bcs: Boundaries
    K: int
    dim: int
    pcp: bool = True
    tvb_m: float | None = None
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        self.cps = control_points(Basis(self.K, self.dim))
        self.min_D = np.inf
        self.min_q = np.inf
        self.calls = 0

    def __call__(self, sol):
        if self.tvb_m is not None:
            sol = tvb_minmod_limit(sol, self.mesh, self.bcs, self.tvb_m)
        if self.pcp:
            p, _, _, sp = pcp_limit_array(sol.primal, self.cps, self.eps, "primal")
            d, _, _, sd = pcp_limit_array(sol.dual, self.cps, self.eps, "dual")
            sol = sol.replace(p, d)
            self.min_D = min(self.min_D, sp["min_D"], sd["min_D"])
            self.min_q = min(self.min_q, sp["min_q"], sd["min_q"])
        else:
            self.check(sol)
        self.calls += 1
        return sol

    def check(self, sol):
        """Record control-point minima without limiting; raise if inadmissible."""
        for tag, c in (("primal", sol.primal), ("dual", sol.dual)):
            vals = self.cps.phi @ c
            q = _q(vals)
            D = vals[..., 0]
            self.min_D = min(self.min_D, float(D.min()))
            self.min_q = min(self.min_q, float(np.nanmin(q)) if np.isfinite(q).any() else -np.inf)
            bad = ~((D > 0) & (q > 0))
            if np.any(bad):
                idx = tuple(int(i) for i in np.argwhere(bad)[0])
                raise AdmissibilityError(f"inadmissible control-point state on the {tag} mesh at {idx[:-1]}", idx)
