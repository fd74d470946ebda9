"""Quadrature norms, error tables and snapshot sampling.

Norms are quadrature sums over both meshes, averaged so that results
compare with single-mesh methods.  Two point sets are offered: the
(K+1)-point Gauss rule on the whole cell (``"gauss"``, the default, which is
how the published accuracy tables were measured) and the Gauss-Lobatto rule
on each half cell (``"lobatto"``, the stability-estimate form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Basis, Mesh1d, build_quadrature, half_cell_points
from .state import conserved_to_primitive

__all__ = [
    "ErrorRow",
    "NORM_RULES",
    "ErrorReport",
    "observed_orders",
    "norm_points",
    "solution_errors",
    "l1_vector_norm",
    "sample_primitives",
]


NORM_RULES = ("gauss", "lobatto")


def norm_points(K: int, dim: int, rule: str = "gauss"):
    """Reference points and weights (summing to 1) of the chosen norm rule."""
    if rule not in NORM_RULES:
        raise ValueError(f"unknown norm rule {rule!r}; expected one of {NORM_RULES}")
    if rule == "gauss":
        x, w = np.polynomial.legendre.leggauss(K + 1)
        x, w = 0.5 * x, 0.5 * w
    else:
        q = build_quadrature(K)
        x = half_cell_points(q.lobatto_nodes)
        w = 0.5 * np.concatenate((q.lobatto_weights, q.lobatto_weights))
    if dim == 1:
        return (x,), w
    X, Y = np.meshgrid(x, x, indexing="ij")
    return (X.ravel(), Y.ravel()), np.outer(w, w).ravel()


def _cell_centers(mesh, dual):
    if isinstance(mesh, Mesh1d):
        return (mesh.dual_centers if dual else mesh.primal_centers,)
    xs = mesh.x.dual_centers if dual else mesh.x.primal_centers
    ys = mesh.y.dual_centers if dual else mesh.y.primal_centers
    return xs, ys


def _physical_points(mesh, dual, ref):
    c = _cell_centers(mesh, dual)
    if len(c) == 1:
        return (c[0][:, None] + mesh.dx * ref[0][None, :],)
    X = c[0][:, None, None] + mesh.dx * ref[0][None, None, :]
    Y = c[1][None, :, None] + mesh.dy * ref[1][None, None, :]
    return np.broadcast_arrays(X, Y)


def _cell_volume(mesh):
    return mesh.dx if isinstance(mesh, Mesh1d) else mesh.dx * mesh.dy


def sample_primitives(eos, coeffs, K, dim, ref):
    phi = Basis(K, dim).values(*ref) if dim == 2 else Basis(K, 1).values(ref[0])
    U = phi @ coeffs
    return conserved_to_primitive(eos, U)


def solution_errors(eos, sol, mesh, exact, t, component: int = 0, rule: str = "gauss"):
    """(l1, l2) errors of primitive ``component`` (default rho) on both meshes.

    ``exact(t, *x)`` must return primitive states.  Intended for periodic
    problems; on bounded axes the dual boundary cells are included whole.
    """
    ref, w = norm_points(sol.K, sol.dim, rule)
    vol = _cell_volume(mesh)
    l1, l2 = [], []
    for dual, coeffs in ((False, sol.primal), (True, sol.dual)):
        w_num = sample_primitives(eos, coeffs, sol.K, sol.dim, ref)[..., component]
        pts = _physical_points(mesh, dual, ref)
        w_ex = exact(t, *pts)[..., component]
        err = np.abs(w_num - w_ex)
        l1.append(vol * float(np.sum(err * w)))
        l2.append(vol * float(np.sum(err**2 * w)))
    return 0.5 * (l1[0] + l1[1]), math.sqrt(0.5 * (l2[0] + l2[1]))


def l1_vector_norm(sol, mesh) -> float:
    """Half-cell Lobatto L1 norm of |D| + |m| + |E| summed over both meshes."""
    ref, w = norm_points(sol.K, sol.dim, "lobatto")
    phi = Basis(sol.K, sol.dim).values(*ref)
    vol = _cell_volume(mesh)
    total = 0.0
    for c in (sol.primal, sol.dual):
        U = phi @ c
        d = U.shape[-1] - 2
        mag = np.abs(U[..., 0]) + np.sqrt(np.sum(U[..., 1 : 1 + d] ** 2, axis=-1)) + np.abs(U[..., -1])
        total += vol * float(np.sum(mag * w))
    return total


def observed_orders(errors, ns=None):
    """log2(e_N / e_2N) for consecutive entries (``None`` for the first).

    When ``ns`` is given the ratio of resolutions is used instead of 2.
    """
    out = [None]
    for i in range(1, len(errors)):
        r = 2.0 if ns is None else ns[i] / ns[i - 1]
        a, b = errors[i - 1], errors[i]
        out.append(math.log(a / b) / math.log(r) if a > 0 and b > 0 else None)
    return out


@dataclass
class ErrorRow:
    n: int
    l1: float
    l2: float
    l1_order: float | None = None
    l2_order: float | None = None


@dataclass
class ErrorReport:
    problem: str
    eos: str
    field: str = "rho"
    rows: list = dc_field(default_factory=list)

    @classmethod
    def from_errors(cls, problem, eos, ns, l1s, l2s, field_name="rho"):
        o1, o2 = observed_orders(l1s, ns), observed_orders(l2s, ns)
        rows = [ErrorRow(n, a, b, c, d) for n, a, b, c, d in zip(ns, l1s, l2s, o1, o2)]
        return cls(problem, eos, field_name, rows)

    def csv(self) -> str:
        fmt = lambda v: "" if v is None else f"{v:.17g}"
        lines = ["N,l1_error,l1_order,l2_error,l2_order"]
        for r in self.rows:
            lines.append(f"{r.n},{fmt(r.l1)},{fmt(r.l1_order)},{fmt(r.l2)},{fmt(r.l2_order)}")
        return "\n".join(lines) + "\n"

    def text(self) -> str:
        o = lambda v: "   --" if v is None else f"{v:5.2f}"
        head = f"{self.problem}  EOS {self.eos}  field {self.field}\n"
        head += f"{'N':>6}  {'l1 error':>10}  {'order':>5}  {'l2 error':>10}  {'order':>5}\n"
        body = "".join(f"{r.n:>6}  {r.l1:10.3e}  {o(r.l1_order)}  {r.l2:10.3e}  {o(r.l2_order)}\n" for r in self.rows)
        return head + body
