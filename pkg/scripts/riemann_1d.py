"""Strong 1D Riemann problem: profile at t = 0.45 and measured wave speeds.

    python scripts/riemann_1d.py --n 640

Writes the primal cell-centre profile as CSV and prints the contact and
shock speeds read off the half-maximum crossings around the density shell.
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pcpcdg.analysis import sample_primitives
from pcpcdg.cli import snapshot_table, write_csv
from pcpcdg.problems import build_setup, get_problem, riemann_shell_state
from pcpcdg.solver import SolverOptions, initial_solution, run


@dataclass
class Config:
    n: int = 640
    integrator: str = "ms3"
    pcp: bool = True
    out: str = "results"


def crossing(x, y, level, i, step):
    while 0 <= i + step < len(y) and y[i + step] >= level:
        i += step
    j = i + step
    return x[i] + (x[j] - x[i]) * (y[i] - level) / (y[i] - y[j])


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--integrator", default=Config.integrator)
    ap.add_argument("--no-pcp", action="store_true")
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    cfg = Config(a.n, a.integrator, not a.no_pcp, a.out)

    spec = get_problem("riemann1d")
    s = build_setup(spec, None, cfg.n)
    u0 = initial_solution(s.eos, s.mesh, 2, s.field)
    r = run(s.eos, s.mesh, s.bcs, u0, SolverOptions(integrator=cfg.integrator, t_final=spec.t_final, pcp=cfg.pcp))
    print(f"steps {r.steps}, wall {r.wall_time:.1f}s, min D {r.min_D:.3e}, min q {r.min_q:.3e}")
    if not r.ok:
        print(f"run failed: {r.failure}")
        return 3
    names, data = snapshot_table(s, r.solution, False, False)
    write_csv(Path(cfg.out) / f"riemann1d_N{cfg.n}_t{r.t:g}.csv", names, data)

    x = s.mesh.primal_centers
    rho = sample_primitives(s.eos, r.solution.primal, 2, 1, (np.zeros(1),))[:, 0, 0]
    ip = int(np.argmax(rho))
    base = rho[np.searchsorted(x, x[ip] - 0.02) : ip].min()
    xs = crossing(x, rho, 0.5 * (rho[ip] + 1.0), ip, 1)
    xc = crossing(x, rho, 0.5 * (rho[ip] + base), ip, -1)
    x0 = spec.params["x0"]
    plateau = riemann_shell_state()[0]
    print(f"contact speed {(xc - x0) / r.t:.5f} (expected {spec.params['contact_speed']})")
    print(f"shock speed   {(xs - x0) / r.t:.5f} (expected {spec.params['shock_speed']})")
    print(f"shell peak    {rho[ip]:.3f} = {100 * rho[ip] / plateau:.1f}% of {plateau:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
