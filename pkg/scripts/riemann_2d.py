"""2D Riemann problems (ideal gas).

    python scripts/riemann_2d.py --which 1 --n 100
    python scripts/riemann_2d.py --which 2 --n 400 --t-final 0.8    # full size, hours

Writes primal cell-centre snapshots suitable for contour plots.
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

from pcpcdg.cli import snapshot_table, write_csv
from pcpcdg.problems import build_setup, get_problem
from pcpcdg.solver import SolverOptions, initial_solution, run


@dataclass
class Config:
    which: int = 1
    n: int = 100
    t_final: float = 0.8
    out: str = "results"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--which", type=int, choices=(1, 2), default=Config.which)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--t-final", type=float, default=Config.t_final)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    cfg = Config(a.which, a.n, a.t_final, a.out)

    spec = get_problem(f"rp2d_{cfg.which}")
    s = build_setup(spec, None, cfg.n)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    opts = SolverOptions(t_final=cfg.t_final, varpi=spec.varpi, tvb_m=spec.tvb_m)
    r = run(s.eos, s.mesh, s.bcs, u0, opts)
    print(f"{spec.name}: steps {r.steps}, wall {r.wall_time:.1f}s, ok {r.ok}, min D {r.min_D:.3e}, min q {r.min_q:.3e}")
    if not r.ok:
        print(r.failure)
        return 3
    names, data = snapshot_table(s, r.solution, False, False)
    write_csv(Path(cfg.out) / f"{spec.name}_N{cfg.n}_t{r.t:g}.csv", names, data)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
