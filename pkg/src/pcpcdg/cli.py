"""Command-line driver.

Subcommands: ``run``, ``converge``, ``validate``, ``reference`` and ``list``.
Settings can also come from an INI file (``--config``); any key there is
overridden by the command-line flag of the same name (dashes or
underscores both accepted in the file).

Exit codes: 0 success, 2 configuration error, 3 solver or admissibility
failure, 4 property violation.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import NORM_RULES, ErrorReport, sample_primitives, solution_errors
from .eos import EosModel, validate_eos
from .grid import Basis
from .limiters import control_points
from .problems import NoExactSolution, build_setup, catalog, exact_solution, get_problem, load_or_build_reference
from .properties import run_property_suite
from .solver import SolverOptions, initial_solution, run
from .state import DEFAULT_EPS, AdmissibilityError

log = logging.getLogger("pcpcdg")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PROPERTY = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce one run."""

    problem: str = "sine1d"
    eos: str | None = None
    n: tuple | None = None
    k: int = 2
    integrator: str = "ms3"
    theta: float | None = None
    varpi: float | None = None
    tvb_m: float | None = None
    pcp: bool = True
    eps: float = DEFAULT_EPS
    t_final: float | None = None
    output_times: tuple = ()
    out: str = "out"
    seed: int = 0
    unsafe: bool = False
    quad_points: bool = False
    dual: bool = False

    def eos_model(self, default: EosModel) -> EosModel:
        return default if self.eos is None else EosModel.parse(self.eos)

    def solver_options(self, spec) -> SolverOptions:
        return SolverOptions(
            K=self.k,
            integrator=self.integrator,
            theta=self.theta,
            varpi=self.varpi if self.varpi is not None else spec.varpi,
            tvb_m=self.tvb_m if self.tvb_m is not None else spec.tvb_m,
            pcp=self.pcp,
            eps=self.eps,
            t_final=self.t_final if self.t_final is not None else spec.t_final,
            output_times=tuple(self.output_times),
            unsafe=self.unsafe,
        )


# --------------------------------------------------------------------------
# parsing helpers


def _ints(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace("x", ",").split(",") if v.strip())


def _floats(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


_CONVERTERS = {
    "n": _ints,
    "ns": _ints,
    "k": int,
    "seed": int,
    "trials": int,
    "theta": float,
    "varpi": float,
    "tvb_m": float,
    "eps": float,
    "t_final": float,
    "output_times": _floats,
    "unsafe": _bool,
    "quad_points": _bool,
    "dual": _bool,
    "no_pcp": _bool,
    "pcp": _bool,
}


def read_config(path) -> dict:
    """Flatten every section of an INI file into one dict of typed values."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    out = {}
    for sec in cp.sections():
        for key, val in cp.items(sec):
            key = key.replace("-", "_")
            try:
                out[key] = _CONVERTERS.get(key, str)(val)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for {key}: {val!r}") from exc
    return out


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI file with defaults for any flag")
    p.add_argument("--problem", help="catalog name (see `list`)")
    p.add_argument("--eos", help="ideal:<gamma> | mathews | sokolov | ryu")
    p.add_argument("--n", type=_ints, help="cells, e.g. 80 or 40,40")
    p.add_argument("--k", type=int, choices=(0, 1, 2), help="polynomial degree")
    p.add_argument("--integrator", choices=("rk3", "ms3"))
    p.add_argument("--theta", type=float, help="dt / tau_max")
    p.add_argument("--varpi", type=float, help="CFL factor")
    p.add_argument("--tvb-m", dest="tvb_m", type=float, help="enable the TVB limiter with constant M")
    p.add_argument("--no-pcp", dest="no_pcp", action="store_const", const=True, help="disable PCP limiting in time")
    p.add_argument("--eps", type=float)
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--unsafe", action="store_const", const=True, help="allow theta above the proven bound")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcpcdg", description="Central DG solver for relativistic hydrodynamics")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run one problem and write CSV snapshots")
    _add_common(p)
    p.add_argument("--output-times", dest="output_times", type=_floats, help="comma-separated snapshot times")
    p.add_argument("--quad-points", dest="quad_points", action="store_const", const=True, help="dump values at every limiter control point")
    p.add_argument("--dual", action="store_const", const=True, help="also write the dual mesh")

    p = sub.add_parser("converge", help="error table over a list of resolutions")
    _add_common(p)
    p.add_argument("--ns", type=_ints, help="resolutions, e.g. 10,20,40,80")
    p.add_argument("--norm", choices=NORM_RULES, help="quadrature rule for the error norms")

    p = sub.add_parser("validate", help="EOS conditions and admissible-set property checks")
    p.add_argument("eos_name", metavar="EOS")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("reference", help="build (or load) a cached first-order reference solution")
    _add_common(p)

    p = sub.add_parser("list", help="show the problem catalog")
    return ap


def resolve(args: argparse.Namespace) -> tuple[RunConfig, dict]:
    """Merge config-file values under command-line flags."""
    vals = read_config(args.config) if getattr(args, "config", None) else {}
    for key, v in vars(args).items():
        if v is not None and key not in ("config", "cmd"):
            vals[key] = v
    if "no_pcp" in vals:
        vals["pcp"] = not vals.pop("no_pcp")
    known = {f for f in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**{k: v for k, v in vals.items() if k in known})
    extra = {k: v for k, v in vals.items() if k not in known}
    return cfg, extra


# --------------------------------------------------------------------------
# snapshot output


def _sample_points(K, dim, quad):
    if not quad:
        return (np.zeros(1),) * dim
    # the limiter's control points: admissible after every stage
    cps = control_points(Basis(K, dim))
    return (cps.xi,) if dim == 1 else (cps.xi, cps.eta)


def snapshot_table(setup, sol, dual: bool, quad_points: bool):
    """Rows of (x[, y], primitives, conserved) sampled on one mesh."""
    mesh = setup.mesh
    ref = _sample_points(sol.K, sol.dim, quad_points)
    coeffs = sol.dual if dual else sol.primal
    prim = sample_primitives(setup.eos, coeffs, sol.K, sol.dim, ref)
    phi = Basis(sol.K, sol.dim).values(*ref)
    cons = phi @ coeffs
    if sol.dim == 1:
        c = mesh.dual_centers if dual else mesh.primal_centers
        coords = [(c[:, None] + mesh.dx * ref[0][None, :]).ravel()]
        names = ["x", "rho", "v", "p", "D", "m", "E"]
    else:
        cx = mesh.x.dual_centers if dual else mesh.x.primal_centers
        cy = mesh.y.dual_centers if dual else mesh.y.primal_centers
        X = cx[:, None, None] + mesh.dx * ref[0][None, None, :]
        Y = cy[None, :, None] + mesh.dy * ref[1][None, None, :]
        X, Y = np.broadcast_arrays(X, Y)
        coords = [X.ravel(), Y.ravel()]
        names = ["x", "y", "rho", "vx", "vy", "p", "D", "mx", "my", "E"]
    nv = prim.shape[-1]
    data = np.column_stack(coords + [prim.reshape(-1, nv), cons.reshape(-1, nv)])
    return names, data


def write_csv(path: Path, names, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt="%.17g")


# --------------------------------------------------------------------------
# commands


def _setup(cfg: RunConfig):
    spec = get_problem(cfg.problem)
    eos = cfg.eos_model(spec.eos)
    n = cfg.n if cfg.n else None
    if n is not None and len(n) == 1:
        n = n[0]
    return spec, build_setup(spec, eos, n)


def cmd_run(cfg: RunConfig) -> int:
    spec, setup = _setup(cfg)
    opts = cfg.solver_options(spec)
    u0 = initial_solution(setup.eos, setup.mesh, cfg.k, setup.field, cfg.eps)
    res = run(setup.eos, setup.mesh, setup.bcs, u0, opts, warn=log.warning)
    out = Path(cfg.out)
    for t, sol in res.snapshots:
        for dual in (False, True) if cfg.dual else (False,):
            names, data = snapshot_table(setup, sol, dual, cfg.quad_points)
            tag = "dual" if dual else "primal"
            write_csv(out / f"{spec.name}_{tag}_t{t:.6g}.csv", names, data)
    print(f"problem {spec.name}  eos {setup.eos}  mesh {'x'.join(map(str, setup.mesh.shape)) if setup.spec.dim == 2 else setup.mesh.n}  K={cfg.k}  {opts.integrator}")
    print(f"steps {res.steps}  t {res.t:.6g}  dt {res.dt:.6g}  theta {res.theta:.6g}  wall {res.wall_time:.2f}s")
    print(f"min D {res.min_D:.6e}  min q {res.min_q:.6e}  recoveries {res.diagnostics.get('recoveries')}")
    if res.failure is not None:
        print(f"FAILURE: {res.failure}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_converge(cfg: RunConfig, ns, norm: str = "gauss") -> ErrorReport:
    spec = get_problem(cfg.problem)
    if spec.exact is None:
        raise NoExactSolution(f"problem {spec.name!r} has no closed-form solution")
    eos = cfg.eos_model(spec.eos)
    opts = cfg.solver_options(spec)
    ex = lambda t, *x: exact_solution(spec, t, *x, eos=eos)
    l1s, l2s = [], []
    for n in ns:
        setup = build_setup(spec, eos, n)
        u0 = initial_solution(eos, setup.mesh, cfg.k, setup.field, cfg.eps)
        res = run(eos, setup.mesh, setup.bcs, u0, opts, warn=log.warning, raise_on_failure=True)
        e1, e2 = solution_errors(eos, res.solution, setup.mesh, ex, res.t, rule=norm)
        log.info("N=%d l1=%.4e l2=%.4e steps=%d wall=%.1fs", n, e1, e2, res.steps, res.wall_time)
        l1s.append(e1)
        l2s.append(e2)
    return ErrorReport.from_errors(spec.name, str(eos), list(ns), l1s, l2s)


def cmd_validate(eos_name: str, trials: int = 100_000, seed: int = 0) -> int:
    eos = EosModel.parse(eos_name, strict=False)
    rep = validate_eos(eos)
    print(rep.text())
    results = run_property_suite(eos, trials=trials, seed=seed)
    print(f"admissible-set properties ({trials} trials each, seed {seed})")
    for r in results:
        print("  " + r.line())
    ok = rep.passed and all(r.passed for r in results)
    print("all pass" if ok else "violations found")
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_reference(cfg: RunConfig) -> int:
    spec = get_problem(cfg.problem)
    eos = cfg.eos_model(spec.eos)
    n = cfg.n[0] if cfg.n else 10 * spec.default_n[0]
    x, w = load_or_build_reference(spec, n, eos, t_final=cfg.t_final)
    out = Path(cfg.out) / f"{spec.name}_reference_N{n}.csv"
    write_csv(out, ["x", "rho", "v", "p"], np.column_stack([x, w]))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_list() -> int:
    for s in catalog():
        flags = []
        if s.exact is not None:
            flags.append("exact")
        if s.long_running:
            flags.append("long-running")
        n = "x".join(str(v) for v in s.default_n)
        print(f"{s.name:<14} {s.dim}D  N={n:<8} t={s.t_final:<5g} eos={s.eos}  {s.title}" + (f"  [{', '.join(flags)}]" if flags else ""))
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(message)s")
    try:
        if args.cmd == "list":
            return cmd_list()
        if args.cmd == "validate":
            return cmd_validate(args.eos_name, args.trials, args.seed)
        cfg, extra = resolve(args)
        if args.cmd == "run":
            return cmd_run(cfg)
        if args.cmd == "reference":
            return cmd_reference(cfg)
        ns = extra.get("ns") or (cfg.n if cfg.n else (10, 20, 40, 80))
        rep = cmd_converge(cfg, ns, extra.get("norm", "gauss"))
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{rep.problem}_errors.csv").write_text(rep.csv())
        print(rep.text(), end="")
        return EXIT_OK
    except (KeyError, ConfigError, NoExactSolution) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if isinstance(exc, AdmissibilityError):
            print(f"admissibility failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


__all__ = ["RunConfig", "build_parser", "main", "read_config", "resolve", "cmd_run", "cmd_converge", "cmd_validate", "snapshot_table"]
