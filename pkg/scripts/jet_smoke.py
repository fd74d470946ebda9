"""Coarse, short jet run standing in for the full-size jet simulations.

    python scripts/jet_smoke.py --problem jet_hot_1 --nx 60 --ny 150 --t-final 3
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

from pcpcdg.cli import snapshot_table, write_csv
from pcpcdg.problems import build_setup, get_problem
from pcpcdg.solver import SolverOptions, initial_solution, run


@dataclass
class Config:
    problem: str = "jet_hot_1"
    nx: int = 60
    ny: int = 150
    t_final: float = 3.0
    varpi: float | None = None
    out: str = "results"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--problem", default=Config.problem)
    ap.add_argument("--nx", type=int, default=Config.nx)
    ap.add_argument("--ny", type=int, default=Config.ny)
    ap.add_argument("--t-final", type=float, default=Config.t_final)
    ap.add_argument("--varpi", type=float, help="CFL factor (default: the catalog value)")
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    cfg = Config(a.problem, a.nx, a.ny, a.t_final, a.varpi, a.out)

    spec = get_problem(cfg.problem)
    s = build_setup(spec, None, (cfg.nx, cfg.ny))
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    varpi = spec.varpi if cfg.varpi is None else cfg.varpi
    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=cfg.t_final, varpi=varpi, tvb_m=spec.tvb_m))
    print(f"{spec.name}: steps {r.steps}, wall {r.wall_time:.1f}s, ok {r.ok}, min D {r.min_D:.3e}, min q {r.min_q:.3e}")
    if not r.ok:
        print(r.failure)
        return 3
    names, data = snapshot_table(s, r.solution, False, False)
    write_csv(Path(cfg.out) / f"{spec.name}_{cfg.nx}x{cfg.ny}_t{r.t:g}.csv", names, data)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
