"""Interacting blast waves; prints the close-up region x in [0.5, 0.53].

    python scripts/blast_wave.py --n 4000      # about ten minutes on one core
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pcpcdg.cli import snapshot_table, write_csv
from pcpcdg.problems import build_setup, get_problem
from pcpcdg.solver import SolverOptions, initial_solution, run


@dataclass
class Config:
    n: int = 4000
    t_final: float = 0.43
    out: str = "results"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--t-final", type=float, default=Config.t_final)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    cfg = Config(a.n, a.t_final, a.out)

    spec = get_problem("blast")
    s = build_setup(spec, None, cfg.n)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(t_final=cfg.t_final))
    print(f"steps {r.steps}, wall {r.wall_time:.1f}s, ok {r.ok}, min D {r.min_D:.3e}, min q {r.min_q:.3e}")
    if not r.ok:
        print(r.failure)
        return 3
    names, data = snapshot_table(s, r.solution, False, False)
    write_csv(Path(cfg.out) / f"blast_N{cfg.n}_t{r.t:g}.csv", names, data)
    sel = (data[:, 0] >= 0.5) & (data[:, 0] <= 0.53)
    i = int(np.argmax(data[sel, 1]))
    print(f"close-up [0.5, 0.53]: peak rho {data[sel, 1][i]:.3f} at x = {data[sel, 0][i]:.5f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
