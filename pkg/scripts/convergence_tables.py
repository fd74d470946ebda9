"""Error tables for the smooth sine-wave problems.

    python scripts/convergence_tables.py                       # 1D, ideal gas
    python scripts/convergence_tables.py --eos ryu
    python scripts/convergence_tables.py --problem sine2d --ns 10,20,40,80,160
"""

import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from pcpcdg.analysis import ErrorReport, solution_errors
from pcpcdg.eos import EosModel
from pcpcdg.problems import build_setup, exact_solution, get_problem
from pcpcdg.solver import SolverOptions, initial_solution, run


@dataclass
class Config:
    problem: str = "sine1d"
    eos: str | None = None
    ns: tuple = (10, 20, 40, 80, 160, 320)
    integrator: str = "ms3"
    pcp: bool = True
    norm: str = "gauss"
    out: str = "results"


def table(cfg: Config) -> ErrorReport:
    spec = get_problem(cfg.problem)
    eos = EosModel.parse(cfg.eos) if cfg.eos else spec.eos
    exact = lambda t, *x: exact_solution(spec, t, *x, eos=eos)
    l1s, l2s = [], []
    for n in cfg.ns:
        s = build_setup(spec, eos, n)
        u0 = initial_solution(eos, s.mesh, 2, s.field)
        opts = SolverOptions(integrator=cfg.integrator, t_final=spec.t_final, varpi=spec.varpi, pcp=cfg.pcp)
        t0 = time.perf_counter()
        r = run(eos, s.mesh, s.bcs, u0, opts, raise_on_failure=True)
        e1, e2 = solution_errors(eos, r.solution, s.mesh, exact, r.t, rule=cfg.norm)
        print(f"  N={n:<4d} l1={e1:.4e} l2={e2:.4e} steps={r.steps} ({time.perf_counter() - t0:.1f}s)", flush=True)
        l1s.append(e1)
        l2s.append(e2)
    return ErrorReport.from_errors(spec.name, str(eos), list(cfg.ns), l1s, l2s)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--problem", default=Config.problem)
    ap.add_argument("--eos")
    ap.add_argument("--ns", default=None, help="comma-separated resolutions")
    ap.add_argument("--integrator", default=Config.integrator, choices=("rk3", "ms3"))
    ap.add_argument("--no-pcp", action="store_true")
    ap.add_argument("--norm", default=Config.norm, choices=("gauss", "lobatto"))
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    ns = tuple(int(v) for v in a.ns.split(",")) if a.ns else ((10, 20, 40, 80, 160) if a.problem == "sine2d" else Config.ns)
    cfg = Config(a.problem, a.eos, ns, a.integrator, not a.no_pcp, a.norm, a.out)
    rep = table(cfg)
    print(rep.text(), end="")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = f"{cfg.problem}_{rep.eos.replace(':', '-')}_{cfg.integrator}{'' if cfg.pcp else '_nopcp'}"
    (out / f"{tag}_errors.csv").write_text(rep.csv())


if __name__ == "__main__":
    main()
