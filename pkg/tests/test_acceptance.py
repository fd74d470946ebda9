"""End-to-end acceptance checks, one test per criterion.

Every test records a PASS/FAIL line (shown in the terminal summary) before
asserting.  Tests marked ``slow`` take minutes; deselect them with
``-m "not slow"``.
"""

import math

import numpy as np
import pytest

from _acceptance_log import record
from pcpcdg.analysis import l1_vector_norm, observed_orders, sample_primitives, solution_errors
from pcpcdg.eos import EosModel
from pcpcdg.problems import build_setup, exact_solution, get_problem, riemann_shell_state, shock_heating_state
from pcpcdg.properties import random_primitives, run_property_suite
from pcpcdg.solver import SolverOptions, initial_solution, run
from pcpcdg.state import DEFAULT_EPS, conserved_to_primitive, pressure_residual, primitive_to_conserved

EPS = DEFAULT_EPS
NS_1D = (10, 20, 40, 80, 160, 320)
NS_2D = (10, 20, 40, 80, 160)


def _errors(name, ns, eos=None, **opt):
    spec = get_problem(name)
    eos = eos or spec.eos
    l1, l2 = [], []
    for n in ns:
        s = build_setup(spec, eos, n)
        u0 = initial_solution(eos, s.mesh, 2, s.field)
        opts = SolverOptions(t_final=spec.t_final, varpi=spec.varpi, **opt)
        r = run(eos, s.mesh, s.bcs, u0, opts, raise_on_failure=True)
        e = solution_errors(eos, r.solution, s.mesh, lambda t, *x: exact_solution(spec, t, *x, eos=eos), r.t)
        l1.append(e[0])
        l2.append(e[1])
    return l1, l2


def _fmt(v):
    return "/".join("--" if x is None else f"{x:.2f}" for x in v)


def _centre_primitives(setup, sol):
    ref = (np.zeros(1),)
    return sample_primitives(setup.eos, sol.primal, sol.K, 1, ref)[:, 0]


@pytest.fixture(scope="module")
def sine_pcp():
    return _errors("sine1d", NS_1D)


@pytest.fixture(scope="module")
def riemann_run():
    spec = get_problem("riemann1d")
    s = build_setup(spec, None, 640)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    n0 = l1_vector_norm(u0, s.mesh)
    worst = [0.0]

    def cb(step, t, sol):
        worst[0] = max(worst[0], l1_vector_norm(sol, s.mesh) / n0)

    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=spec.t_final), callback=cb)
    return s, r, worst[0]


# --------------------------------------------------------------------------


def test_criterion_01_convergence_1d(sine_pcp):
    l1, l2 = sine_pcp
    o1, o2 = observed_orders(l1), observed_orders(l2)
    fine = [i for i, n in enumerate(NS_1D) if n >= 80]
    orders_ok = all(2.8 <= o1[i] <= 3.2 and 2.8 <= o2[i] <= 3.2 for i in fine)
    ratio = l1[-1] / 5.570e-9
    ok = orders_ok and 1 / 3 <= ratio <= 3
    record(1, ok, f"N=320 l1={l1[-1]:.3e} (x{ratio:.3f} of 5.570e-9), l1 orders {_fmt(o1[3:])}, l2 orders {_fmt(o2[3:])}")
    assert ok


def test_criterion_02_general_eos():
    # verdict on the N=10..320 sequence; the 640 pair is reported only, to
    # show where the pre-asymptotic slopes settle
    parts, ok = [], True
    for name in ("mathews", "sokolov", "ryu"):
        l1, l2 = _errors("sine1d", NS_1D + (640,), EosModel(name))
        o1, o2 = observed_orders(l1), observed_orders(l2)
        ok &= 2.7 <= o1[-2] <= 3.3 and 2.7 <= o2[-2] <= 3.3
        parts.append(f"{name} {o1[-2]:.2f}/{o2[-2]:.2f} (640: {o1[-1]:.2f}/{o2[-1]:.2f})")
    record(2, ok, "160/320 l1/l2 orders: " + ", ".join(parts))
    assert ok


@pytest.mark.slow
def test_criterion_03_convergence_2d():
    l1, l2 = _errors("sine2d", NS_2D)
    o1, o2 = observed_orders(l1), observed_orders(l2)
    fine = [i for i, n in enumerate(NS_2D) if n >= 40]
    orders_ok = all(2.8 <= o1[i] <= 3.2 and 2.8 <= o2[i] <= 3.2 for i in fine)
    ratio = l1[-1] / 4.707e-7
    ok = orders_ok and 1 / 3 <= ratio <= 3
    record(3, ok, f"N=160 l1={l1[-1]:.3e} (x{ratio:.3f} of 4.707e-7), l1 orders {_fmt(o1[2:])}, l2 orders {_fmt(o2[2:])}")
    assert ok


@pytest.mark.slow
def test_criterion_04_pcp_survival(riemann_run):
    _, r, _ = riemann_run
    parts = [f"riemann ok={r.ok} min D={r.min_D:.3e} min q={r.min_q:.3e}"]
    ok = r.ok and r.min_D >= EPS and r.min_q >= EPS

    spec = get_problem("blast")
    s = build_setup(spec, None, 4000)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    b = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=spec.t_final))
    ok &= b.ok and b.min_D >= EPS and b.min_q >= EPS
    parts.append(f"blast ok={b.ok} min D={b.min_D:.3e} min q={b.min_q:.3e}")

    spec = get_problem("riemann1d")
    s = build_setup(spec, None, 640)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    nf = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=spec.t_final, pcp=False, max_steps=50))
    broke = nf.failure is not None and "budget" not in str(nf.failure)
    ok &= broke
    parts.append(f"no-pcp failure at step {nf.failure.step if nf.failure else None}")
    record(4, ok, "; ".join(parts))
    assert ok


def _crossing(x, y, level, i0, step):
    """First position from index i0 (walking by ``step``) where y drops below level."""
    i = i0
    while 0 <= i + step < len(y) and y[i + step] >= level:
        i += step
    j = i + step
    return x[i] + (x[j] - x[i]) * (y[i] - level) / (y[i] - y[j])


@pytest.mark.slow
def test_criterion_05_riemann_wave_speeds(riemann_run):
    s, r, _ = riemann_run
    assert r.ok
    w = _centre_primitives(s, r.solution)
    x = s.mesh.primal_centers
    rho = w[:, 0]
    ip = int(np.argmax(rho))
    peak = rho[ip]
    left_base = rho[np.searchsorted(x, x[ip] - 0.02) : ip].min()
    x_shock = _crossing(x, rho, 0.5 * (peak + 1.0), ip, 1)
    x_contact = _crossing(x, rho, 0.5 * (peak + left_base), ip, -1)
    t, x0 = r.t, get_problem("riemann1d").params["x0"]
    vc, vs = (x_contact - x0) / t, (x_shock - x0) / t
    plateau = riemann_shell_state()[0]
    ec, es = abs(vc / 0.986956 - 1), abs(vs / 0.9963757 - 1)
    ok = ec < 0.01 and es < 0.01 and peak >= 0.85 * plateau
    record(
        5, ok,
        f"contact {vc:.5f} ({100 * ec:.2f}% off), shock {vs:.5f} ({100 * es:.2f}% off), "
        f"peak {peak:.3f} = {100 * peak / plateau:.1f}% of {plateau:.3f}",
    )
    assert ok


def test_criterion_06_shock_heating():
    spec = get_problem("shock_heating")
    s = build_setup(spec, None, 200)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=spec.t_final, tvb_m=spec.tvb_m, varpi=spec.varpi))
    assert r.ok, r.failure
    sigma = 28287.27
    _, _, vs = shock_heating_state(s.eos)
    x = s.mesh.primal_centers
    w = _centre_primitives(s, r.solution)
    front = 1.0 + vs * r.t
    sel = (x > front + 5 * s.mesh.dx) & (np.arange(x.size) < x.size - 5)
    dev = np.abs(w[sel, 0] / sigma - 1).max()
    vmax = np.abs(w[sel, 1]).max()
    ok = dev <= 0.03 and vmax < 1e-3
    record(6, ok, f"{sel.sum()} plateau cells, max |rho/sigma - 1| = {dev:.2e}, max |v| = {vmax:.2e}")
    assert ok


def test_criterion_07_property_suite():
    bad = []
    worst = {}
    for eos in (EosModel.ideal(5 / 3), EosModel("mathews"), EosModel("sokolov"), EosModel("ryu")):
        for res in run_property_suite(eos, trials=100_000, seed=0):
            worst[res.name] = min(worst.get(res.name, np.inf), res.worst_margin)
            if not res.passed:
                bad.append(f"{eos}:{res.name}")
    ok = not bad
    detail = "1e5 trials x 6 properties x 4 EOS, " + ("zero violations" if ok else "violations in " + ", ".join(bad))
    record(7, ok, detail + f"; worst margin {min(worst.values()):+.1e}")
    assert ok


def test_criterion_08_recovery_round_trip():
    rng = np.random.default_rng(2024)
    worst_prim, worst_res, worst_cons = 0.0, 0.0, 0.0
    n_bad = n_beyond = 0
    for eos in (EosModel.ideal(5 / 3), EosModel("mathews"), EosModel("sokolov"), EosModel("ryu")):
        w = random_primitives(rng, 10_000, dim=1)
        U = primitive_to_conserved(eos, w)
        w2 = conserved_to_primitive(eos, U)
        rel = np.abs(w2 - w) / np.abs(w)
        res = np.abs(pressure_residual(eos, U, w2[:, -1])) / (U[:, -1] + w2[:, -1])
        U2 = primitive_to_conserved(eos, w2)
        cons = np.max(np.abs(U2 - U), axis=1) / np.max(np.abs(U), axis=1)
        n_bad += int(np.count_nonzero(rel.max(axis=1) > 1e-10))
        # diagnostic only: forming U from (rho, v, p) already loses about
        # W^2 (E + p) / p ulps of p, which no recovery can get back
        W2 = 1.0 / ((1 - np.abs(w[:, 1])) * (1 + np.abs(w[:, 1])))
        cond = W2 * (U[:, -1] + w[:, -1]) / w[:, -1]
        n_beyond += int(np.count_nonzero(rel.max(axis=1) > 1e-10 + 1e-15 * cond))
        worst_prim = max(worst_prim, float(rel.max()))
        worst_res = max(worst_res, float(res.max()))
        worst_cons = max(worst_cons, float(cons.max()))
    ok = worst_prim <= 1e-10 and worst_res <= 1e-10
    record(
        8, ok,
        f"primitive rel. error worst {worst_prim:.1e} ({n_bad}/40000 above 1e-10); "
        f"scaled residual worst {worst_res:.1e}; conserved round trip worst {worst_cons:.1e}; "
        f"{n_beyond} samples beyond the conditioning bound",
    )
    assert ok


@pytest.mark.slow
def test_criterion_09_conservation_and_l1(riemann_run):
    spec = get_problem("sine1d")
    s = build_setup(spec, None, 80)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    tot = lambda sol: sol.primal[:, 0, :].sum(axis=0) + sol.dual[:, 0, :].sum(axis=0)
    t0 = tot(u0)
    drift = np.zeros(3)

    def cb(step, t, sol):
        drift[:] = np.maximum(drift, np.abs(tot(sol) - t0) / np.abs(t0))

    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=spec.t_final), callback=cb)
    _, rr, growth = riemann_run
    ok = r.ok and drift[0] < 1e-11 and drift[2] < 1e-11 and rr.ok and growth < 2.0
    record(9, ok, f"drift D {drift[0]:.1e}, E {drift[2]:.1e}; riemann max l1 norm / initial = {growth:.4f} (< 2)")
    assert ok


def test_criterion_10_limiter_accuracy(sine_pcp):
    # without limiting, the near-vacuum profile breaks recovery at N <= 20,
    # so the unlimited sequence starts at 40 (enough for orders at N >= 80)
    ns_off = tuple(n for n in NS_1D if n >= 40)
    on = dict(zip(NS_1D, observed_orders(sine_pcp[0])))
    off = dict(zip(ns_off, observed_orders(_errors("sine1d", ns_off, pcp=False)[0])))
    fine = [n for n in NS_1D if n >= 80]
    diffs = [abs(on[n] - off[n]) for n in fine]
    ok = max(diffs) < 0.1
    record(
        10, ok,
        f"l1 orders on {_fmt([on[n] for n in fine])}, off {_fmt([off[n] for n in fine])}, "
        f"max difference {max(diffs):.3f}",
    )
    assert ok


@pytest.mark.slow
def test_criterion_11_jet_smoke():
    spec = get_problem("jet_hot_1")
    s = build_setup(spec, None, (60, 150))
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=3.0, varpi=spec.varpi, tvb_m=spec.tvb_m))
    ok = r.ok and r.min_D >= EPS and r.min_q >= EPS
    record(11, ok, f"{spec.name} 60x150 to t=3: ok={r.ok}, {r.steps} steps, min D={r.min_D:.3e}, min q={r.min_q:.3e}")
    assert ok
