"""Ghost-cell boundary conditions shared by the residual and the limiters.

Coefficient arrays are shaped ``cells + (modes, components)``.  Padding adds
one ghost layer on each side of every spatial axis.

On a bounded axis the dual mesh has ``n + 1`` cells whose centres sit on the
primal interfaces, including the two physical boundaries.  Mirroring about
the boundary therefore maps primal cell 0 onto the primal ghost, and dual
cell 1 (not 0, which is centred on the wall) onto the dual ghost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BoundaryCondition", "Boundaries", "pad", "mode_parity"]

_KINDS = ("periodic", "outflow", "reflecting", "inflow")


@dataclass(frozen=True)
class BoundaryCondition:
    """Condition on one side of the domain.

    ``state`` is the conserved inflow state.  ``window`` restricts inflow to
    cells whose tangential centre lies in ``[lo, hi]``; elsewhere the side
    behaves as outflow.  Windows only make sense in 2D.
    """

    kind: str
    state: tuple | None = None
    window: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "inflow" and self.state is None:
            raise ValueError("inflow boundary needs a state")


PERIODIC = BoundaryCondition("periodic")


@dataclass(frozen=True)
class Boundaries:
    """Per-side conditions; ``bottom``/``top`` are only read in 2D."""

    left: BoundaryCondition = PERIODIC
    right: BoundaryCondition = PERIODIC
    bottom: BoundaryCondition = PERIODIC
    top: BoundaryCondition = PERIODIC

    def __post_init__(self):
        for lo, hi in ((self.left, self.right), (self.bottom, self.top)):
            if (lo.kind == "periodic") != (hi.kind == "periodic"):
                raise ValueError("periodic boundaries must be paired")

    def periodic(self, axis: int) -> bool:
        return (self.left if axis == 0 else self.bottom).kind == "periodic"

    def side(self, axis: int, hi: bool) -> BoundaryCondition:
        return (self.right if hi else self.left) if axis == 0 else (self.top if hi else self.bottom)

    @classmethod
    def all(cls, bc: BoundaryCondition) -> "Boundaries":
        return cls(bc, bc, bc, bc)


def mode_parity(dim: int, K: int, axis: int) -> np.ndarray:
    """+1/-1 per mode: the sign each mode picks up under x_axis -> -x_axis."""
    if dim == 1:
        return np.array([1.0, -1.0, 1.0][: K + 1])
    # modes 1, xi, eta, xi^2, xi eta, eta^2
    odd_x = np.array([0, 1, 0, 0, 1, 0])
    odd_y = np.array([0, 0, 1, 0, 1, 0])
    odd = odd_x if axis == 0 else odd_y
    size = (K + 1) * (K + 2) // 2
    return np.where(odd[:size] == 1, -1.0, 1.0)


def _ghost(bc, interior_edge, mirror_src, axis, dim, K, tangential):
    """Ghost slab for one side.

    ``interior_edge`` is the boundary-adjacent slab and ``mirror_src`` the
    slab whose reflection lands on the ghost position.
    """
    if bc.kind == "outflow":
        g = np.zeros_like(interior_edge)
        g[..., 0, :] = interior_edge[..., 0, :]
        return g
    if bc.kind == "reflecting":
        g = mirror_src * mode_parity(dim, K, axis)[:, None]
        g[..., 1 + axis] *= -1.0
        return g
    # inflow
    g = np.zeros_like(interior_edge)
    g[..., 0, :] = np.asarray(bc.state, dtype=float)
    if bc.window is not None:
        lo, hi = bc.window
        outside = (tangential < lo) | (tangential > hi)
        g[outside, 0, :] = interior_edge[outside, 0, :]
    return g


def _pad_axis(arr, axis, bcs: Boundaries, dual: bool, dim: int, K: int, tangential):
    n = arr.shape[axis]
    take = lambda i: np.take(arr, [i], axis=axis)
    if bcs.periodic(axis):
        lo, hi = take(n - 1), take(0)
    else:
        src_lo = 1 if dual else 0
        src_hi = n - 2 if dual else n - 1
        sq = lambda a: np.squeeze(a, axis=axis)
        lo = _ghost(bcs.side(axis, False), sq(take(0)), sq(take(src_lo)), axis, dim, K, tangential)
        hi = _ghost(bcs.side(axis, True), sq(take(n - 1)), sq(take(src_hi)), axis, dim, K, tangential)
        lo, hi = np.expand_dims(lo, axis), np.expand_dims(hi, axis)
    return np.concatenate((lo, arr, hi), axis=axis)


def pad(arr: np.ndarray, mesh, bcs: Boundaries, dual: bool, K: int) -> np.ndarray:
    """Return ``arr`` with one ghost layer per side on each spatial axis."""
    dim = arr.ndim - 2
    if dim == 1:
        return _pad_axis(arr, 0, bcs, dual, 1, K, None)
    mx, my = mesh.x, mesh.y
    yc = my.dual_centers if dual else my.primal_centers
    out = _pad_axis(arr, 0, bcs, dual, 2, K, yc)
    xc = mx.dual_centers if dual else mx.primal_centers
    xc = np.concatenate(([xc[0] - mx.dx], xc, [xc[-1] + mx.dx]))
    return _pad_axis(out, 1, bcs, dual, 2, K, xc)
