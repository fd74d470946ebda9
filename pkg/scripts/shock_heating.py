"""Ultra-relativistic cold stream hitting a wall (ideal gas, Gamma = 4/3).

    python scripts/shock_heating.py --n 200
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pcpcdg.analysis import sample_primitives
from pcpcdg.cli import snapshot_table, write_csv
from pcpcdg.problems import build_setup, get_problem, shock_heating_state
from pcpcdg.solver import SolverOptions, initial_solution, run


@dataclass
class Config:
    n: int = 200
    t_final: float = 2.0
    out: str = "results"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--t-final", type=float, default=Config.t_final)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    cfg = Config(a.n, a.t_final, a.out)

    spec = get_problem("shock_heating")
    s = build_setup(spec, None, cfg.n)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=cfg.t_final))
    print(f"steps {r.steps}, wall {r.wall_time:.1f}s, ok {r.ok}")
    if not r.ok:
        print(r.failure)
        return 3
    names, data = snapshot_table(s, r.solution, False, False)
    write_csv(Path(cfg.out) / f"shock_heating_N{cfg.n}_t{r.t:g}.csv", names, data)
    sigma, p2, vs = shock_heating_state(s.eos)
    x = s.mesh.primal_centers
    w = sample_primitives(s.eos, r.solution.primal, 2, 1, (np.zeros(1),))[:, 0]
    sel = (x > 1 + vs * r.t + 5 * s.mesh.dx) & (np.arange(x.size) < x.size - 5)
    print(f"analytic: rho {sigma:.2f}, p {p2:.4e}, shock speed {vs:.5f}")
    print(f"plateau:  rho mean {w[sel, 0].mean():.2f}, max |rho/sigma-1| {np.abs(w[sel, 0] / sigma - 1).max():.2e}, "
          f"max |v| {np.abs(w[sel, 1]).max():.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
