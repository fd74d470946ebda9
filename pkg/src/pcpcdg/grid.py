"""Overlapping meshes, scaled Legendre bases and half-cell quadrature.

Reference coordinates run over [-1/2, 1/2] in every direction:
``xi = (x - x_c) / dx``.  Quadrature rules are normalised to unit total
weight on that interval and are applied separately on each half cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as npleg

__all__ = [
    "QuadratureSet",
    "build_quadrature",
    "Basis",
    "Mesh1d",
    "Mesh2d",
    "evaluate_basis",
    "project_initial",
    "half_cell_points",
]


# --------------------------------------------------------------------------
# quadrature


def _gauss(n: int):
    x, w = npleg.leggauss(n)
    return 0.5 * x, 0.5 * w


def _lobatto(n: int):
    if n == 1:
        return np.zeros(1), np.ones(1)
    # interior nodes are the roots of P'_{n-1}
    c = np.zeros(n)
    c[-1] = 1.0
    inner = npleg.legroots(npleg.legder(c))
    x = np.concatenate(([-1.0], np.sort(inner.real), [1.0]))
    w = 2.0 / (n * (n - 1) * npleg.legval(x, c) ** 2)
    return 0.5 * x, 0.5 * w


@dataclass(frozen=True)
class QuadratureSet:
    """Gauss (``Q``) and Gauss-Lobatto (``L``) rules on [-1/2, 1/2]."""

    K: int
    gauss_nodes: np.ndarray
    gauss_weights: np.ndarray
    lobatto_nodes: np.ndarray
    lobatto_weights: np.ndarray

    @property
    def Q(self) -> int:
        return self.gauss_nodes.size

    @property
    def L(self) -> int:
        return self.lobatto_nodes.size

    @property
    def omega1(self) -> float:
        """First (endpoint) Gauss-Lobatto weight."""
        return float(self.lobatto_weights[0])


def build_quadrature(K: int) -> QuadratureSet:
    if K not in (0, 1, 2):
        raise ValueError(f"unsupported polynomial degree K={K}; expected 0, 1 or 2")
    if K == 0:
        # a single midpoint serves both roles
        one = np.ones(1)
        return QuadratureSet(0, np.zeros(1), one, np.zeros(1), one)
    Q = K + 1
    L = math.ceil((K + 3) / 2)
    gx, gw = _gauss(Q)
    lx, lw = _lobatto(L)
    return QuadratureSet(K, gx, gw, lx, lw)


def half_cell_points(nodes):
    """Nodes of a unit rule mapped onto both half cells, left half first."""
    nodes = np.asarray(nodes, dtype=float)
    return np.concatenate((-0.25 + 0.5 * nodes, 0.25 + 0.5 * nodes))


# --------------------------------------------------------------------------
# basis


def _leg1(K, t):
    t = np.asarray(t, dtype=float)
    cols = [np.ones_like(t), t, 12.0 * t * t - 1.0][: K + 1]
    return np.stack(cols, axis=-1)


def _dleg1(K, t):
    t = np.asarray(t, dtype=float)
    cols = [np.zeros_like(t), np.ones_like(t), 24.0 * t][: K + 1]
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class Basis:
    """Scaled Legendre modal basis of total degree ``K`` in ``dim`` dimensions.

    2D ordering: 1, xi, eta, 12 xi^2 - 1, xi eta, 12 eta^2 - 1.
    """

    K: int
    dim: int = 1

    def __post_init__(self):
        if self.K not in (0, 1, 2) or self.dim not in (1, 2):
            raise ValueError("basis needs K in {0,1,2} and dim in {1,2}")

    @property
    def size(self) -> int:
        return self.K + 1 if self.dim == 1 else (self.K + 1) * (self.K + 2) // 2

    @property
    def mass(self) -> np.ndarray:
        """Diagonal of the mass matrix on the unit reference cell."""
        m1 = np.array([1.0, 1.0 / 12.0, 0.8])
        if self.dim == 1:
            return m1[: self.size].copy()
        full = np.array([1.0, 1 / 12, 1 / 12, 0.8, 1 / 144, 0.8])
        return full[: self.size].copy()

    # degree pairs (a, b) of xi^a eta^b families for the 2D modes
    @property
    def _pairs(self):
        return [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)][: self.size]

    def values(self, xi, eta=None) -> np.ndarray:
        """Basis values, shape ``xi.shape + (size,)``."""
        if self.dim == 1:
            return _leg1(self.K, xi)
        px = _leg1(2, xi)
        py = _leg1(2, eta)
        return np.stack([px[..., a] * py[..., b] for a, b in self._pairs], axis=-1)

    def gradient(self, xi, eta=None):
        """Reference derivatives.  1D: array; 2D: (d/dxi, d/deta)."""
        if self.dim == 1:
            return _dleg1(self.K, xi)
        px, py = _leg1(2, xi), _leg1(2, eta)
        dx, dy = _dleg1(2, xi), _dleg1(2, eta)
        gx = np.stack([dx[..., a] * py[..., b] for a, b in self._pairs], axis=-1)
        gy = np.stack([px[..., a] * dy[..., b] for a, b in self._pairs], axis=-1)
        return gx, gy


def evaluate_basis(basis: Basis, center, spacing, x) -> np.ndarray:
    """Basis values at physical point(s) ``x`` of the cell centred at ``center``.

    For 2D pass tuples for ``center``, ``spacing`` and ``x``.
    """
    if basis.dim == 1:
        return basis.values((np.asarray(x, float) - center) / spacing)
    xi = (np.asarray(x[0], float) - center[0]) / spacing[0]
    eta = (np.asarray(x[1], float) - center[1]) / spacing[1]
    return basis.values(xi, eta)


# --------------------------------------------------------------------------
# meshes


@dataclass(frozen=True)
class Mesh1d:
    """Uniform primal cells on [a, b] and the dual cells centred on their interfaces.

    A periodic mesh has ``n`` dual cells (the last one straddles the
    wrap-around interface, stored centred at ``a``).  A bounded mesh has
    ``n + 1`` dual cells; the two outermost hang half outside the domain.
    """

    a: float
    b: float
    n: int
    periodic: bool = False

    def __post_init__(self):
        if not self.b > self.a or self.n < 1:
            raise ValueError("mesh needs b > a and n >= 1")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def n_dual(self) -> int:
        return self.n if self.periodic else self.n + 1

    @property
    def primal_centers(self) -> np.ndarray:
        return self.a + (np.arange(self.n) + 0.5) * self.dx

    @property
    def dual_centers(self) -> np.ndarray:
        return self.a + np.arange(self.n_dual) * self.dx


@dataclass(frozen=True)
class Mesh2d:
    """Tensor product of two 1D meshes.  Dual cells are offset by (dx/2, dy/2)."""

    x: Mesh1d
    y: Mesh1d

    @classmethod
    def build(cls, ax, bx, nx, ay, by, ny, periodic_x=False, periodic_y=False):
        return cls(Mesh1d(ax, bx, nx, periodic_x), Mesh1d(ay, by, ny, periodic_y))

    @property
    def dx(self) -> float:
        return self.x.dx

    @property
    def dy(self) -> float:
        return self.y.dx

    @property
    def shape(self):
        return (self.x.n, self.y.n)

    @property
    def dual_shape(self):
        return (self.x.n_dual, self.y.n_dual)


# --------------------------------------------------------------------------
# projection


def _project_cells_1d(basis, quad, centers, dx, field):
    xi = half_cell_points(quad.gauss_nodes)
    w = 0.5 * np.concatenate((quad.gauss_weights, quad.gauss_weights))
    phi = basis.values(xi)  # (P, M)
    X = centers[:, None] + dx * xi[None, :]
    vals = np.asarray(field(X), dtype=float)  # (N, P, nv)
    coeffs = np.einsum("p,pm,npv->nmv", w, phi, vals) / basis.mass[None, :, None]
    return coeffs, vals


def _project_cells_2d(basis, quad, cx, cy, dx, dy, field):
    h = half_cell_points(quad.gauss_nodes)
    hw = 0.5 * np.concatenate((quad.gauss_weights, quad.gauss_weights))
    XI, ETA = np.meshgrid(h, h, indexing="ij")
    W = np.outer(hw, hw).ravel()
    xi, eta = XI.ravel(), ETA.ravel()
    phi = basis.values(xi, eta)
    X = cx[:, None, None] + dx * xi[None, None, :]
    Y = cy[None, :, None] + dy * eta[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    vals = np.asarray(field(X, Y), dtype=float)  # (Nx, Ny, P, nv)
    coeffs = np.einsum("p,pm,xypv->xymv", W, phi, vals) / basis.mass[None, None, :, None]
    return coeffs, vals


def project_initial(basis: Basis, mesh, field: Callable, quad=None, eps: float = 1e-13):
    """L2-project a pointwise conserved-state field onto both meshes.

    ``field(x)`` (1D) or ``field(x, y)`` (2D) must return conserved states
    with components on a trailing axis.  The Gauss rule is applied on each
    half cell, so jumps located at primal interfaces or dual centres are
    integrated exactly.  Returns ``(primal, dual)`` coefficient arrays of
    shape ``cells + (modes, components)``.
    """
    from .state import AdmissibilityError, is_admissible

    quad = quad or build_quadrature(basis.K)
    if basis.dim == 1:
        P, vp = _project_cells_1d(basis, quad, mesh.primal_centers, mesh.dx, field)
        Dd, vd = _project_cells_1d(basis, quad, mesh.dual_centers, mesh.dx, field)
    else:
        P, vp = _project_cells_2d(basis, quad, mesh.x.primal_centers, mesh.y.primal_centers, mesh.dx, mesh.dy, field)
        Dd, vd = _project_cells_2d(basis, quad, mesh.x.dual_centers, mesh.y.dual_centers, mesh.dx, mesh.dy, field)
    for tag, v in (("primal", vp), ("dual", vd)):
        ok = is_admissible(v, eps)
        if not np.all(ok):
            idx = np.argwhere(~ok)[0]
            raise AdmissibilityError(f"initial field inadmissible on {tag} mesh at {tuple(idx)}", tuple(idx))
    return P, Dd
