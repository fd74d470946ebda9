"""Benchmark problem catalog, closed-form and Rankine-Hugoniot oracles, and a
first-order Lax-Friedrichs reference solver.

Initial data are given as primitive fields built for a chosen EOS (several
setups depend on the EOS through the pressure).  ``build_setup`` turns a
spec into the mesh, boundaries and initial DG solution the solver needs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import optimize

from . import _kernels as Kn
from .boundary import Boundaries, BoundaryCondition
from .eos import EosModel, internal_energy, sound_speed_sq
from .grid import Mesh1d, Mesh2d
from .state import primitive_to_conserved

__all__ = [
    "ProblemSpec",
    "NoExactSolution",
    "catalog",
    "get_problem",
    "exact_solution",
    "build_setup",
    "Setup",
    "shock_heating_state",
    "riemann_shell_state",
    "jet_ambient_pressure",
    "reference_lxf",
    "load_or_build_reference",
]

IDEAL_53 = EosModel.ideal(5.0 / 3.0)


class NoExactSolution(LookupError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    """One benchmark.

    ``initial(eos)`` returns the primitive field ``f(x)`` or ``f(x, y)``;
    ``boundaries(eos)`` the ghost-cell rules.  ``exact(eos, t, *x)`` is
    present only where a closed form exists.
    """

    name: str
    title: str
    dim: int
    domain: tuple
    initial: Callable
    boundaries: Callable
    eos: EosModel
    t_final: float
    default_n: tuple
    exact: Callable | None = None
    tvb_m: float | None = None
    varpi: float | None = None
    long_running: bool = False
    notes: str = ""
    params: dict = field(default_factory=dict)

    @property
    def periodic(self) -> bool:
        return self.boundaries(self.eos).periodic(0)


def _const(*vals):
    v = np.asarray(vals, dtype=float)

    def f(*xs):
        return np.broadcast_to(v, np.shape(xs[0]) + v.shape).copy()

    return f


def _stack(*cols):
    cols = np.broadcast_arrays(*cols)
    return np.stack(cols, axis=-1).astype(float)


# --------------------------------------------------------------------------
# smooth waves


def _sine1d(eos):
    return lambda x: _stack(1.0 + 0.99999 * np.sin(2 * np.pi * x), 0.99, 1e-2)


def _sine1d_exact(eos, t, x):
    return _stack(1.0 + 0.99999 * np.sin(2 * np.pi * (x - 0.99 * t)), 0.99, 1e-2)


_VD = 0.99 / math.sqrt(2.0)


def _sine2d(eos):
    return lambda x, y: _stack(1.0 + 0.99999 * np.sin(2 * np.pi * (x + y)), _VD, _VD, 1e-2)


def _sine2d_exact(eos, t, x, y):
    # each velocity component is 0.99/sqrt(2), so x + y shifts by 0.99 sqrt(2) t
    return _stack(1.0 + 0.99999 * np.sin(2 * np.pi * (x + y - 0.99 * math.sqrt(2.0) * t)), _VD, _VD, 1e-2)


# --------------------------------------------------------------------------
# 1D discontinuous problems


def _riemann1d(eos):
    return lambda x: np.where((x < 0.5)[..., None], [[1.0, 0.0, 1e4]], [[1.0, 0.0, 1e-8]]).reshape(np.shape(x) + (3,))


def _blast(eos):
    def f(x):
        x = np.asarray(x, float)
        p = np.where(x < 0.1, 1000.0, np.where(x < 0.9, 0.01, 100.0))
        return _stack(1.0, 0.0, p)

    return f


SH_V0 = 1.0 - 1e-8
SH_E0 = 1e-4


def _pressure_for_energy(eos: EosModel, rho: float, e: float) -> float:
    """Invert e(p, rho) = e for p (closed form for the ideal gas)."""
    if eos.name == "ideal":
        return (eos.gamma - 1.0) * rho * e
    f = lambda lx: math.log(internal_energy(eos, rho * math.exp(lx), rho)) - math.log(e)
    return rho * math.exp(optimize.brentq(f, -60.0, 60.0, xtol=1e-15))


def _shock_heating(eos):
    p0 = _pressure_for_energy(eos, 1.0, SH_E0)
    return _const(1.0, SH_V0, p0)


def shock_heating_state(eos: EosModel, v0: float = SH_V0, e0: float = SH_E0):
    """Post-shock rest state and shock speed for a cold stream hitting a wall.

    Solves the three jump conditions (mass, momentum, energy) across a shock
    into which the unit-density stream flows, with the downstream gas at
    rest.  Returns ``(rho2, p2, shock_speed)``.
    """
    p1 = _pressure_for_energy(eos, 1.0, e0)
    U1 = primitive_to_conserved(eos, np.array([1.0, v0, p1]))
    F1 = U1 * v0
    F1[1] += p1
    F1[2] = U1[1]
    W0 = 1.0 / math.sqrt((1 - v0) * (1 + v0))
    # strong-shock estimates: e2 = W0 - 1, sigma = 4 W0 + 3
    guess = np.log([4 * W0 + 3, (4 * W0 + 3) * (W0 - 1) / 3])

    def eqs(z):
        rho2, p2 = np.exp(z)
        U2 = primitive_to_conserved(eos, np.array([rho2, 0.0, p2]))
        F2 = np.array([0.0, p2, 0.0])
        # shock speed from the mass condition, then momentum and energy
        s = (F2[0] - F1[0]) / (U2[0] - U1[0])
        return [(F2[1] - F1[1] - s * (U2[1] - U1[1])) / F1[1], (F2[2] - F1[2] - s * (U2[2] - U1[2])) / U1[2]]

    z = optimize.fsolve(eqs, guess, xtol=1e-14)
    rho2, p2 = np.exp(z)
    s = -F1[0] / (primitive_to_conserved(eos, np.array([rho2, 0.0, p2]))[0] - U1[0])
    return float(rho2), float(p2), float(s)


def _shock_heating_exact(eos, t, x):
    rho2, p2, s = shock_heating_state(eos)
    p1 = _pressure_for_energy(eos, 1.0, SH_E0)
    behind = np.asarray(x) > 1.0 + s * t
    return np.where(behind[..., None], [[rho2, 0.0, p2]], [[1.0, SH_V0, p1]]).reshape(np.shape(x) + (3,))


def riemann_shell_state(eos: EosModel = IDEAL_53, shock_speed: float = 0.9963757, upstream=(1.0, 0.0, 1e-8)):
    """State behind a right-moving shock of given speed into ``upstream``.

    Returns primitive ``(rho, v, p)`` of the shocked shell.
    """
    rho1, v1, p1 = upstream
    U1 = primitive_to_conserved(eos, np.array(upstream, float))
    F1 = np.array([U1[0] * v1, U1[1] * v1 + p1, U1[1]])
    s = shock_speed

    def eqs(z):
        rho2, p2 = math.exp(min(z[0], 700.0)), math.exp(min(z[1], 700.0))
        v2 = math.tanh(z[2])
        if not (rho2 > 0.0 and p2 > 0.0 and abs(v2) < 1.0):
            return np.full(3, 1e10)
        U2 = primitive_to_conserved(eos, np.array([rho2, v2, p2]))
        F2 = np.array([U2[0] * v2, U2[1] * v2 + p2, U2[1]])
        r = F2 - F1 - s * (U2 - U1)
        return r / np.maximum(np.abs(F2), 1e-300)

    best = None
    for rho0 in (5.0, 10.0, 20.0, 40.0):
        for p0 in (1.0, 10.0, 100.0):
            sol, info, ier, _ = optimize.fsolve(eqs, [math.log(rho0), math.log(p0), math.atanh(0.98)], full_output=True, xtol=1e-14)
            res = np.max(np.abs(info["fvec"]))
            if best is None or res < best[1]:
                best = (sol, res)
    z = best[0]
    return float(math.exp(z[0])), float(math.tanh(z[2])), float(math.exp(z[1]))


# --------------------------------------------------------------------------
# 2D Riemann problems


def _quadrants(ne, nw, sw, se, x0=0.0, y0=0.0):
    states = [np.asarray(s, float) for s in (ne, nw, sw, se)]

    def f(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        east, north = x > x0, y > y0
        out = np.empty(x.shape + (4,))
        for s, m in zip(states, (east & north, ~east & north, ~east & ~north, east & ~north)):
            out[m] = s
        return out

    return f


def _rp1(eos):
    return _quadrants((0.1, 0, 0, 0.01), (0.1, 0.99, 0, 1), (0.5, 0, 0, 1), (0.1, 0, 0.99, 1))


_RP2_RHO = 0.00414329639576
_RP2_V = 0.9946418833556542


def _rp2(eos):
    return _quadrants((0.1, 0, 0, 20), (_RP2_RHO, _RP2_V, 0, 0.05), (0.01, 0, 0, 0.05), (_RP2_RHO, 0, _RP2_V, 0.05))


# --------------------------------------------------------------------------
# jets


def jet_ambient_pressure(eos: EosModel, rho_b: float, v_b: float, mach: float) -> float:
    """Pressure at which the beam's sound speed is v_b / M_b."""
    target = (v_b / mach) ** 2
    f = lambda lx: sound_speed_sq(eos, rho_b * math.exp(lx), rho_b) - target
    lo, hi = -80.0, 80.0
    if not (f(lo) < 0 < f(hi)):
        raise ValueError(f"no pressure gives c_s = {v_b / mach:.6g} for {eos}")
    return rho_b * math.exp(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-15))


def _jet_factory(rho_b, v_b, mach):
    def initial(eos):
        p = jet_ambient_pressure(eos, rho_b, v_b, mach)
        return _const(1.0, 0.0, 0.0, p)

    def boundaries(eos):
        p = jet_ambient_pressure(eos, rho_b, v_b, mach)
        beam = tuple(primitive_to_conserved(eos, np.array([rho_b, 0.0, v_b, p])))
        out = BoundaryCondition("outflow")
        return Boundaries(
            left=BoundaryCondition("reflecting"),
            right=out,
            bottom=BoundaryCondition("inflow", beam, window=(-0.5, 0.5)),
            top=out,
        )

    return initial, boundaries


# --------------------------------------------------------------------------
# catalog

_OUT = BoundaryCondition("outflow")


def _bc(left, right=None, bottom=None, top=None):
    right = right or left
    return lambda eos: Boundaries(left, right, bottom or left, top or right)


def _build_catalog():
    per = BoundaryCondition("periodic")
    specs = [
        ProblemSpec(
            "sine1d", "1D smooth sine wave", 1, (0.0, 1.0), _sine1d, _bc(per), IDEAL_53, 0.2, (80,),
            exact=_sine1d_exact, notes="periodic; exact solution is the translated profile",
        ),
        ProblemSpec(
            "riemann1d", "1D Riemann problem with pressure jump 1e4 | 1e-8", 1, (0.0, 1.0), _riemann1d, _bc(_OUT),
            IDEAL_53, 0.45, (640,), notes="contact speed 0.986956, shock speed 0.9963757 for the ideal gas",
            params={"contact_speed": 0.986956, "shock_speed": 0.9963757, "x0": 0.5},
        ),
        ProblemSpec(
            "shock_heating", "Cold ultra-relativistic stream hitting a wall", 1, (0.0, 1.0), _shock_heating,
            _bc(_OUT, BoundaryCondition("reflecting")), EosModel.ideal(4.0 / 3.0), 2.0, (200,),
            exact=_shock_heating_exact, notes="v0 = 1 - 1e-8, e0 = 1e-4; reflecting wall at x = 1",
            params={"W0": 1.0 / math.sqrt((1 - SH_V0) * (1 + SH_V0)), "sigma": 28287.27},
        ),
        ProblemSpec(
            "blast", "Interacting blast waves", 1, (0.0, 1.0), _blast, _bc(_OUT), EosModel.ideal(1.4), 0.43, (4000,),
            notes="close-up region [0.5, 0.53]",
        ),
        ProblemSpec(
            "sine2d", "2D diagonal sine wave", 2, ((0.0, 1.0), (0.0, 1.0)), _sine2d, _bc(per), IDEAL_53, 0.2, (40, 40),
            exact=_sine2d_exact, varpi=1.0 / 6.0,
        ),
        ProblemSpec(
            "rp2d_1", "2D Riemann problem with contacts and non-simple waves", 2, ((-1.0, 1.0), (-1.0, 1.0)), _rp1,
            _bc(_OUT), IDEAL_53, 0.8, (400, 400), tvb_m=0.0, varpi=1.0,
        ),
        ProblemSpec(
            "rp2d_2", "2D Riemann problem with contacts and shocks", 2, ((-1.0, 1.0), (-1.0, 1.0)), _rp2, _bc(_OUT),
            IDEAL_53, 0.8, (400, 400), tvb_m=0.0, varpi=1.0,
            notes="quadrant split placed at the origin of [-1,1]^2",
        ),
    ]
    ryu = EosModel("ryu")
    hot = [(0.99, 1.72), (0.999, 1.74), (0.9999, 1.74)]
    for k, (vb, mb) in enumerate(hot, 1):
        ini, bcs = _jet_factory(0.01, vb, mb)
        specs.append(ProblemSpec(
            f"jet_hot_{k}", f"Pressure-matched hot jet, v_b={vb}, M_b={mb}", 2, ((0.0, 12.0), (0.0, 30.0)), ini, bcs,
            ryu, 30.0, (240, 600), tvb_m=0.0, varpi=1.0, long_running=True,
            params={"rho_b": 0.01, "v_b": vb, "M_b": mb},
        ))
    cold = [(0.99, 50.0, 30.0), (0.999, 50.0, 25.0), (0.9999, 500.0, 23.0)]
    for k, (vb, mb, tf) in enumerate(cold, 1):
        ini, bcs = _jet_factory(0.1, vb, mb)
        specs.append(ProblemSpec(
            f"jet_cold_{k}", f"Pressure-matched cold jet, v_b={vb}, M_b={mb}", 2, ((0.0, 12.0), (0.0, 25.0)), ini, bcs,
            IDEAL_53, tf, (240, 500), tvb_m=0.0, varpi=1.0, long_running=True,
            params={"rho_b": 0.1, "v_b": vb, "M_b": mb},
        ))
    return specs


_CATALOG = None


def catalog() -> list:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return list(_CATALOG)


def get_problem(name: str) -> ProblemSpec:
    for s in catalog():
        if s.name == name:
            return s
    raise KeyError(f"unknown problem {name!r}; available: {', '.join(s.name for s in catalog())}")


def exact_solution(spec: ProblemSpec, t: float, *x, eos: EosModel | None = None):
    if spec.exact is None:
        raise NoExactSolution(f"problem {spec.name!r} has no closed-form solution")
    return spec.exact(eos or spec.eos, t, *x)


# --------------------------------------------------------------------------
# setup


@dataclass
class Setup:
    spec: ProblemSpec
    eos: EosModel
    mesh: object
    bcs: Boundaries
    field: Callable  # conserved field


def build_setup(spec: ProblemSpec, eos: EosModel | None = None, n=None) -> Setup:
    eos = eos or spec.eos
    n = spec.default_n if n is None else n
    n = (n,) * spec.dim if np.isscalar(n) else tuple(n)
    bcs = spec.boundaries(eos)
    prim = spec.initial(eos)
    if spec.dim == 1:
        a, b = spec.domain
        mesh = Mesh1d(a, b, int(n[0]), bcs.periodic(0))
        field = lambda x: primitive_to_conserved(eos, prim(x))
    else:
        (ax, bx), (ay, by) = spec.domain
        mesh = Mesh2d.build(ax, bx, int(n[0]), ay, by, int(n[1]), bcs.periodic(0), bcs.periodic(1))
        field = lambda x, y: primitive_to_conserved(eos, prim(x, y))
    return Setup(spec, eos, mesh, bcs, field)


# --------------------------------------------------------------------------
# first-order reference


def _ghosted(U, bcs: Boundaries):
    lo, hi = bcs.left, bcs.right
    def ghost(bc, edge):
        if bc.kind == "periodic":
            return None
        if bc.kind == "reflecting":
            g = edge.copy()
            g[1] = -g[1]
            return g
        if bc.kind == "inflow":
            return np.asarray(bc.state, float)
        return edge
    if lo.kind == "periodic":
        return np.concatenate((U[-1:], U, U[:1]))
    return np.concatenate((ghost(lo, U[0])[None], U, ghost(hi, U[-1])[None]))


def reference_lxf(spec: ProblemSpec, n: int, eos: EosModel | None = None, t_final: float | None = None, cfl: float = 0.5):
    """First-order Lax-Friedrichs finite-volume solution on ``n`` cells.

    Uses the global speed bound 1 (the speed of light), which keeps every
    update a convex combination of admissible states.  Returns
    ``(x, primitive)`` at cell centres.
    """
    if spec.dim != 1:
        raise ValueError("reference solutions are 1D only")
    eos = eos or spec.eos
    t_final = spec.t_final if t_final is None else t_final
    setup = build_setup(spec, eos, n)
    mesh = setup.mesh
    x = mesh.primal_centers
    # cell averages by 3-point Gauss on each half cell
    g, w = np.polynomial.legendre.leggauss(3)
    pts = np.concatenate((-0.25 + 0.25 * g, 0.25 + 0.25 * g))
    ww = np.concatenate((w, w)) / 4.0
    U = np.einsum("p,npv->nv", ww, setup.field(x[:, None] + mesh.dx * pts[None, :]))
    dt = cfl * mesh.dx
    lam = dt / mesh.dx
    t = 0.0
    guess = np.empty(0)
    kind, gam = eos.kind, eos.kernel_gamma
    while t < t_final * (1 - 1e-14):
        h = min(dt, t_final - t)
        lam = h / mesh.dx
        Ug = np.ascontiguousarray(_ghosted(U, setup.bcs))
        F, p, st, bad = Kn.flux_batch(kind, gam, Ug, 1, guess)
        if st != Kn.OK:
            raise RuntimeError(f"reference solver: recovery failed at cell {bad}, t={t}")
        guess = p
        F = F[:, 0, :]
        Fh = 0.5 * (F[:-1] + F[1:] - (Ug[1:] - Ug[:-1]))
        U = U - lam * (Fh[1:] - Fh[:-1])
        t += h
    from .state import conserved_to_primitive

    return x, conserved_to_primitive(eos, U)


def _cache_name(spec, eos, n, t):
    return f"{spec.name}_{str(eos).replace(':', '-')}_N{n}_t{t:g}.csv"


def load_or_build_reference(spec: ProblemSpec, n: int, eos: EosModel | None = None, cache_dir=None, t_final=None):
    """Read a cached reference CSV or compute and store it."""
    eos = eos or spec.eos
    t_final = spec.t_final if t_final is None else t_final
    cache_dir = Path(cache_dir or os.environ.get("PCPCDG_CACHE", Path.home() / ".cache" / "pcpcdg"))
    path = cache_dir / _cache_name(spec, eos, n, t_final)
    if path.exists():
        data = np.loadtxt(path, delimiter=",", comments="#", skiprows=2)
        return data[:, 0], data[:, 1:]
    x, w = reference_lxf(spec, n, eos, t_final)
    cache_dir.mkdir(parents=True, exist_ok=True)
    header = f"problem={spec.name}, eos={eos}, N={n}, t={t_final!r}\nx,rho,v,p"
    np.savetxt(path, np.column_stack([x, w]), delimiter=",", header=header, fmt="%.17g")
    return x, w
