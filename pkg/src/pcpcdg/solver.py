"""Central DG discretisation on overlapping primal/dual meshes.

Each mesh carries its own modal DG solution.  The update of a cell on one
mesh only needs the solution of the *other* mesh, which is smooth across
the cell's interior points and edges, so no Riemann solver is involved.
A relaxation term (U_other - U_own)/tau supplies the numerical dissipation.

Residual bookkeeping
--------------------
A cell centred at ``c`` overlaps two cells of the other mesh per axis.
With ``other_ext`` the padded other-mesh array restricted so that own cell
``i`` overlaps ``other_ext[i]`` (left/below) and ``other_ext[i + 1]``, every
overlap is a half cell (1D) or a quadrant (2D) of both cells.  Fluxes are
sampled at a fixed list of reference points of each other-mesh cell:

* 1D: Gauss points of the left half, of the right half, then the centre;
* 2D: Gauss tensor points of the four quadrants (SW, SE, NW, NE), then
  Gauss points on the lower/upper halves of the vertical centre line, then
  on the left/right halves of the horizontal centre line.

Precomputed tables turn those samples into modal contributions.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as Kn
from .boundary import Boundaries, pad
from .eos import EosModel
from .grid import Basis, Mesh1d, Mesh2d, QuadratureSet, build_quadrature, half_cell_points, project_initial
from .limiters import Limiter
from .state import DEFAULT_EPS, AdmissibilityError, RecoveryError

__all__ = [
    "DgSolution",
    "TimeControl",
    "CentralDG",
    "SolverOptions",
    "RunResult",
    "residual_1d",
    "residual_2d",
    "compute_dt",
    "make_time_control",
    "step_ssp_rk3",
    "step_ssp_ms3",
    "run",
    "SolverFailure",
    "initial_solution",
    "default_theta",
]


class SolverFailure(RuntimeError):
    """A stage failed (recovery or admissibility); carries step/time context."""

    def __init__(self, msg, step=None, t=None, cause=None):
        super().__init__(msg)
        self.step = step
        self.t = t
        self.cause = cause


@dataclass
class DgSolution:
    """Modal coefficients on both meshes, shaped ``cells + (modes, comps)``."""

    primal: np.ndarray
    dual: np.ndarray
    K: int
    dim: int

    def replace(self, primal, dual) -> "DgSolution":
        return DgSolution(primal, dual, self.K, self.dim)

    def copy(self) -> "DgSolution":
        return self.replace(self.primal.copy(), self.dual.copy())

    def axpy(self, a: float, other: "DgSolution", b: float = 1.0) -> "DgSolution":
        """b * self + a * other."""
        return self.replace(b * self.primal + a * other.primal, b * self.dual + a * other.dual)

    def averages(self):
        return self.primal[..., 0, :], self.dual[..., 0, :]


@dataclass(frozen=True)
class TimeControl:
    """theta = dt / tau_max; RK3 admits theta in (0, 1], MS3 theta in (0, 1/3]."""

    theta: float
    dt: float
    integrator: str = "ms3"
    varpi: float | None = None

    def __post_init__(self):
        if self.integrator not in ("rk3", "ms3"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not (self.theta > 0 and self.dt > 0):
            raise ValueError("theta and dt must be positive")

    @property
    def tau_max(self) -> float:
        return self.dt / self.theta

    @property
    def theta_bound(self) -> float:
        return 1.0 if self.integrator == "rk3" else 1.0 / 3.0


def default_theta(integrator: str) -> float:
    return 1.0 if integrator == "rk3" else 1.0 / 3.0


def compute_dt(mesh, theta: float, K: int, varpi: float | None = None) -> float:
    """Largest step of the PCP CFL condition in the form used for experiments.

    1D: dt = varpi * theta * dx / 2 with varpi defaulting to the first
    Gauss-Lobatto weight.  2D: dt = varpi * theta / (2 (1/dx + 1/dy)).
    """
    w1 = build_quadrature(K).omega1
    varpi = w1 if varpi is None else varpi
    if isinstance(mesh, Mesh1d):
        return 0.5 * varpi * theta * mesh.dx
    return varpi * theta / (2.0 * (1.0 / mesh.dx + 1.0 / mesh.dy))


def make_time_control(mesh, K: int, integrator: str = "ms3", theta=None, varpi=None, unsafe=False, warn=None):
    theta = default_theta(integrator) if theta is None else float(theta)
    bound = 1.0 if integrator == "rk3" else 1.0 / 3.0
    if theta > bound * (1 + 1e-12):
        msg = f"theta={theta} exceeds the {integrator} bound {bound:.6g}"
        if not unsafe:
            raise ValueError(msg + " (pass unsafe=True to override)")
        if warn:
            warn(msg)
    return TimeControl(theta, compute_dt(mesh, theta, K, varpi), integrator, varpi)


# --------------------------------------------------------------------------
# precomputed tables


def _half_overlap_1d(basis: Basis, quad: QuadratureSet):
    """A_L[nu, mu] = int_{-1/2}^{0} phi_nu(xi) phi_mu(xi + 1/2), and A_R likewise."""
    # four points integrate the degree-4 products exactly
    gx, gw = np.polynomial.legendre.leggauss(4)
    gx, gw = 0.5 * gx, 0.5 * gw
    xl = -0.25 + 0.5 * gx
    xr = 0.25 + 0.5 * gx
    AL = 0.5 * np.einsum("p,pn,pm->nm", gw, basis.values(xl), basis.values(xl + 0.5))
    AR = 0.5 * np.einsum("p,pn,pm->nm", gw, basis.values(xr), basis.values(xr - 0.5))
    return AL, AR


def _tables_1d(basis: Basis, quad: QuadratureSet):
    g, w = quad.gauss_nodes, quad.gauss_weights
    Q = g.size
    pts = np.concatenate((half_cell_points(g), [0.0]))
    phi_pts = basis.values(pts)  # other-mesh basis at its sample points
    dphi = basis.gradient
    xiL = -0.25 + 0.5 * g  # own left-half Gauss points
    xiR = 0.25 + 0.5 * g
    M = basis.size
    TL = np.zeros((2 * Q + 1, M))  # applied to the left neighbour's samples
    TR = np.zeros((2 * Q + 1, M))
    TL[Q : 2 * Q] = 0.5 * w[:, None] * dphi(xiL)
    TL[2 * Q] = basis.values(np.array([-0.5]))[0]
    TR[:Q] = 0.5 * w[:, None] * dphi(xiR)
    TR[2 * Q] = -basis.values(np.array([0.5]))[0]
    AL, AR = _half_overlap_1d(basis, quad)
    return phi_pts, TL, TR, AL, AR


_QUADS = ((-1, -1), (1, -1), (-1, 1), (1, 1))  # SW, SE, NW, NE


def _points_2d(g):
    """Reference sample points of an other-mesh cell, in the order documented above."""
    xs, ys = [], []
    for qx, qy in _QUADS:
        a = qx / 4 + 0.5 * g
        b = qy / 4 + 0.5 * g
        A, B = np.meshgrid(a, b, indexing="ij")
        xs.append(A.ravel())
        ys.append(B.ravel())
    for h in (-1, 1):  # vertical centre line, lower then upper half
        xs.append(np.zeros_like(g))
        ys.append(h / 4 + 0.5 * g)
    for h in (-1, 1):  # horizontal centre line, left then right half
        xs.append(h / 4 + 0.5 * g)
        ys.append(np.zeros_like(g))
    return np.concatenate(xs), np.concatenate(ys)


def _tables_2d(basis: Basis, quad: QuadratureSet, dx: float, dy: float):
    g, w = quad.gauss_nodes, quad.gauss_weights
    Q = g.size
    px, py = _points_2d(g)
    P = px.size
    M = basis.size
    quad_index = {q: np.arange(i * Q * Q, (i + 1) * Q * Q) for i, q in enumerate(_QUADS)}
    vline = {h: 4 * Q * Q + (0 if h < 0 else Q) + np.arange(Q) for h in (-1, 1)}
    hline = {h: 4 * Q * Q + 2 * Q + (0 if h < 0 else Q) + np.arange(Q) for h in (-1, 1)}
    ww = np.outer(w, w).ravel()

    tables = {}
    for sx, sy in _QUADS:  # own quadrant, overlapped by the other cell lying that way
        T = np.zeros((P, 2, M))
        # volume: own points (sx/4 + g_a/2, sy/4 + g_b/2) = other's quadrant (-sx, -sy)
        a = sx / 4 + 0.5 * g
        b = sy / 4 + 0.5 * g
        A, B = np.meshgrid(a, b, indexing="ij")
        gx, gy = basis.gradient(A.ravel(), B.ravel())
        idx = quad_index[(-sx, -sy)]
        T[idx, 0] += 0.25 * ww[:, None] * gx / dx
        T[idx, 1] += 0.25 * ww[:, None] * gy / dy
        # vertical own edge x = sx/2, half eta in sign sy -> other's vertical line half -sy
        ph = basis.values(np.full(Q, sx / 2), sy / 4 + 0.5 * g)
        T[vline[-sy], 0] += -sx * 0.5 * w[:, None] * ph / dx
        # horizontal own edge y = sy/2, half xi in sign sx -> other's horizontal line half -sx
        ph = basis.values(sx / 4 + 0.5 * g, np.full(Q, sy / 2))
        T[hline[-sx], 1] += -sy * 0.5 * w[:, None] * ph / dy
        used = np.flatnonzero(np.any(T != 0.0, axis=(1, 2)))
        tables[(sx, sy)] = (used, T[used])

    # quadrant overlap matrices for the relaxation term
    gx4, gw4 = np.polynomial.legendre.leggauss(4)
    gx4, gw4 = 0.5 * gx4, 0.5 * gw4
    A_q = {}
    for sx, sy in _QUADS:
        a = sx / 4 + 0.5 * gx4
        b = sy / 4 + 0.5 * gx4
        AA, BB = np.meshgrid(a, b, indexing="ij")
        W4 = 0.25 * np.outer(gw4, gw4).ravel()
        own = basis.values(AA.ravel(), BB.ravel())
        oth = basis.values(AA.ravel() - sx / 2, BB.ravel() - sy / 2)
        A_q[(sx, sy)] = np.einsum("p,pn,pm->nm", W4, own, oth)
    return basis.values(px, py), tables, A_q


# --------------------------------------------------------------------------
# operator


class CentralDG:
    """Semi-discrete operator L(U) for both meshes.

    ``tau`` is the relaxation time (tau_max).  Pressures found at the flux
    sample points are remembered and reused as Newton starting values on
    the next call, which is where most of the recovery cost goes.
    """

    def __init__(self, eos: EosModel, mesh, bcs: Boundaries, K: int, tau: float, warm_start: bool = True):
        self.eos = eos
        self.mesh = mesh
        self.bcs = bcs
        self.K = K
        self.dim = 1 if isinstance(mesh, Mesh1d) else 2
        self.basis = Basis(K, self.dim)
        self.quad = build_quadrature(K)
        self.tau = float(tau)
        self.warm_start = warm_start
        self._guess = {}
        self.n_evals = 0
        if self.dim == 2 and (mesh.x.periodic != bcs.periodic(0) or mesh.y.periodic != bcs.periodic(1)):
            raise ValueError("mesh periodicity does not match the boundary conditions")
        if self.dim == 1 and mesh.periodic != bcs.periodic(0):
            raise ValueError("mesh periodicity does not match the boundary conditions")
        if self.dim == 1:
            self.phi_pts, self.TL, self.TR, self.AL, self.AR = _tables_1d(self.basis, self.quad)
        else:
            self.phi_pts, self.tables, self.A_q = _tables_2d(self.basis, self.quad, mesh.dx, mesh.dy)
            P = self.phi_pts.shape[0]
            blocks = []
            for q in _QUADS:
                used, T = self.tables[q]
                full = np.zeros((P, 2, self.basis.size))
                full[used] = T
                blocks.append(full.reshape(2 * P, -1).T)
            self._T_all = np.ascontiguousarray(np.vstack(blocks))
            self._A_all = np.vstack([self.A_q[q] for q in _QUADS]) / tau
        self.inv_mass = 1.0 / self.basis.mass

    # -- flux sampling
    def _fluxes(self, key, coeffs):
        vals = self.phi_pts @ coeffs
        shape = vals.shape[:-1]
        flat = np.ascontiguousarray(vals.reshape(-1, vals.shape[-1]))
        g = self._guess.get(key) if self.warm_start else None
        if g is None or g.size != flat.shape[0]:
            g = np.empty(0)
        F, p, st, bad = Kn.flux_batch(self.eos.kind, self.eos.kernel_gamma, flat, self.dim, g)
        if st != Kn.OK:
            idx = np.unravel_index(bad, shape)
            if st == Kn.BAD_INPUT:
                raise AdmissibilityError(f"inadmissible state at {key} sample {idx}", idx)
            raise RecoveryError(f"recovery failed at {key} sample {idx}", idx)
        self._guess[key] = p
        self.n_evals += flat.shape[0]
        return F.reshape(shape + F.shape[1:])  # cells + (points, dim, comps)

    # -- 1D
    def _own_rhs_1d(self, own, other_ext, key):
        F = self._fluxes(key, other_ext)[:, :, 0, :]  # (C, P, nv)
        G = self.TL.T @ F
        H = self.TR.T @ F
        flux_part = (G[:-1] + H[1:]) / self.mesh.dx
        relax = (
            self.AL @ other_ext[:-1]
            + self.AR @ other_ext[1:]
            - self.basis.mass[None, :, None] * own
        ) / self.tau
        return (flux_part + relax) * self.inv_mass[None, :, None]

    # -- 2D
    def _own_rhs_2d(self, own, other_ext, key):
        F = self._fluxes(key, other_ext)  # (Cx, Cy, P, 2, nv)
        cx, cy = F.shape[:2]
        nx, ny = own.shape[:2]
        M = self.basis.size
        # every quadrant's flux and overlap contributions in two BLAS calls
        R = self._T_all @ F.reshape(cx, cy, -1, F.shape[-1]) + self._A_all @ other_ext
        out = -self.basis.mass[None, None, :, None] * own / self.tau
        for q, (sx, sy) in enumerate(_QUADS):
            ox, oy = (sx + 1) // 2, (sy + 1) // 2
            out = out + R[ox : ox + nx, oy : oy + ny, q * M : (q + 1) * M]
        return out * self.inv_mass[None, None, :, None]

    def __call__(self, sol: DgSolution) -> DgSolution:
        P_pad = pad(sol.primal, self.mesh, self.bcs, False, self.K)
        D_pad = pad(sol.dual, self.mesh, self.bcs, True, self.K)
        if self.dim == 1:
            n = sol.primal.shape[0]
            rp = self._own_rhs_1d(sol.primal, D_pad[1 : n + 2], "dual")
            rd = self._own_rhs_1d(sol.dual, P_pad[: sol.dual.shape[0] + 1], "primal")
        else:
            nx, ny = sol.primal.shape[:2]
            rp = self._own_rhs_2d(sol.primal, D_pad[1 : nx + 2, 1 : ny + 2], "dual")
            mx, my = sol.dual.shape[:2]
            rd = self._own_rhs_2d(sol.dual, P_pad[: mx + 1, : my + 1], "primal")
        return sol.replace(rp, rd)


def residual_1d(sol: DgSolution, eos: EosModel, mesh: Mesh1d, bcs: Boundaries, tc: TimeControl) -> DgSolution:
    """One-shot 1D residual (builds the operator; use ``CentralDG`` in loops)."""
    return CentralDG(eos, mesh, bcs, sol.K, tc.tau_max, warm_start=False)(sol)


def residual_2d(sol: DgSolution, eos: EosModel, mesh: Mesh2d, bcs: Boundaries, tc: TimeControl) -> DgSolution:
    return CentralDG(eos, mesh, bcs, sol.K, tc.tau_max, warm_start=False)(sol)


# --------------------------------------------------------------------------
# time stepping


def step_ssp_rk3(sol: DgSolution, rhs: Callable, dt: float, limiter: Callable, L0: DgSolution | None = None):
    """Three-stage SSP Runge-Kutta step with limiting after each stage.

    Returns ``(new_solution, L(sol))`` so callers can reuse the first
    residual (the multistep history needs it).
    """
    L0 = rhs(sol) if L0 is None else L0
    u1 = limiter(sol.axpy(dt, L0))
    u2 = limiter(sol.axpy(0.25, u1.axpy(dt, rhs(u1)), 0.75))
    u3 = limiter(sol.axpy(2.0 / 3.0, u2.axpy(dt, rhs(u2)), 1.0 / 3.0))
    return u3, L0


def step_ssp_ms3(history, dt: float, limiter: Callable) -> DgSolution:
    """Four-step SSP multistep update.

    ``history`` holds ``(U, L(U))`` pairs, oldest first; the last four are
    U^{n-3}, ..., U^n.
    """
    if len(history) < 4:
        raise ValueError("multistep update needs four history levels")
    (u3, l3), (un, ln) = history[-4], history[-1]
    a = un.axpy(3.0 * dt, ln)
    b = u3.axpy(12.0 / 11.0 * dt, l3)
    return limiter(a.axpy(11.0 / 27.0, b, 16.0 / 27.0))


# --------------------------------------------------------------------------
# driver


@dataclass
class SolverOptions:
    K: int = 2
    integrator: str = "ms3"
    theta: float | None = None
    varpi: float | None = None
    tvb_m: float | None = None
    pcp: bool = True
    eps: float = DEFAULT_EPS
    t_final: float = 1.0
    output_times: tuple = ()
    unsafe: bool = False
    max_steps: int | None = None
    warm_start: bool = True


@dataclass
class RunResult:
    solution: DgSolution
    t: float
    steps: int
    snapshots: list  # (t, DgSolution)
    min_D: float
    min_q: float
    dt: float
    theta: float
    wall_time: float
    failure: SolverFailure | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failure is None


def initial_solution(eos, mesh, K, field, eps=DEFAULT_EPS) -> DgSolution:
    """Project a pointwise *conserved* field onto both meshes."""
    dim = 1 if isinstance(mesh, Mesh1d) else 2
    p, d = project_initial(Basis(K, dim), mesh, field, eps=eps)
    return DgSolution(p, d, K, dim)


def run(
    eos: EosModel,
    mesh,
    bcs: Boundaries,
    u0: DgSolution,
    opts: SolverOptions,
    callback: Callable | None = None,
    warn: Callable | None = None,
    raise_on_failure: bool = False,
) -> RunResult:
    """Advance ``u0`` to ``opts.t_final``.

    Steps are clipped to land exactly on output times and on the final
    time.  A clipped step is taken with RK3 (its theta stays below the RK3
    bound because tau is fixed), after which the multistep history restarts.
    ``callback(step, t, sol)`` runs after every completed step.
    """
    tc = make_time_control(mesh, opts.K, opts.integrator, opts.theta, opts.varpi, opts.unsafe, warn)
    op = CentralDG(eos, mesh, bcs, opts.K, tc.tau_max, opts.warm_start)
    lim = Limiter(mesh, bcs, opts.K, u0.dim, opts.pcp, opts.tvb_m, opts.eps)
    t0 = time.perf_counter()
    # the projected data is always scaled into the admissible set; ``pcp``
    # only governs limiting during time stepping
    init = lim if opts.pcp else Limiter(mesh, bcs, opts.K, u0.dim, True, opts.tvb_m, opts.eps)
    sol = init(u0)
    targets = sorted({float(x) for x in opts.output_times if 0 < x < opts.t_final} | {float(opts.t_final)})
    snaps = []
    t, step = 0.0, 0
    hist = deque(maxlen=4)
    failure = None
    try:
        for target in targets:
            while t < target * (1 - 1e-14):
                if opts.max_steps is not None and step >= opts.max_steps:
                    raise SolverFailure(f"step budget {opts.max_steps} exhausted at t={t}", step, t)
                dt = tc.dt
                clipped = t + dt >= target * (1 - 1e-14)
                if clipped:
                    dt = target - t
                try:
                    # history holds (U, L(U)) at consecutive uniform steps
                    if not hist or hist[-1][0] is not sol:
                        hist.append((sol, op(sol)))
                    if opts.integrator == "ms3" and len(hist) == 4 and not clipped:
                        new = step_ssp_ms3(hist, dt, lim)
                    else:
                        new, _ = step_ssp_rk3(sol, op, dt, lim, hist[-1][1])
                except (AdmissibilityError, RecoveryError) as exc:
                    raise SolverFailure(f"step {step + 1} failed at t={t:.6g}: {exc}", step + 1, t, exc) from exc
                sol = new
                t = target if clipped else t + dt
                step += 1
                if clipped:
                    hist.clear()
                if callback is not None:
                    callback(step, t, sol)
            snaps.append((t, sol.copy()))
    except SolverFailure as exc:
        failure = exc
        if raise_on_failure:
            raise
    return RunResult(
        sol, t, step, snaps, lim.min_D, lim.min_q, tc.dt, tc.theta, time.perf_counter() - t0, failure,
        {"recoveries": op.n_evals, "tau": tc.tau_max, "limiter_calls": lim.calls},
    )
