import subprocess
import sys

import numpy as np
import pytest

from pcpcdg.cli import EXIT_CONFIG, EXIT_OK, EXIT_PROPERTY, EXIT_SOLVER, build_parser, main, read_config, resolve


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list(capsys):
    code, out, _ = _run(["list"], capsys)
    assert code == EXIT_OK
    assert "sine1d" in out and "jet_cold_3" in out and "long-running" in out


def test_run_writes_snapshots(tmp_path, capsys):
    code, out, _ = _run(
        ["run", "--problem", "sine1d", "--n", "10", "--t-final", "0.02", "--output-times", "0.01", "--dual", "--out", str(tmp_path)],
        capsys,
    )
    assert code == EXIT_OK
    assert "min q" in out and "steps" in out
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["sine1d_dual_t0.01.csv", "sine1d_dual_t0.02.csv", "sine1d_primal_t0.01.csv", "sine1d_primal_t0.02.csv"]
    text = (tmp_path / "sine1d_primal_t0.02.csv").read_text().splitlines()
    assert text[0] == "x,rho,v,p,D,m,E"
    assert len(text) == 11
    data = np.loadtxt(tmp_path / "sine1d_primal_t0.02.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 0], (np.arange(10) + 0.5) / 10)
    assert len(text[1].split(",")[1].replace(".", "").lstrip("0")) >= 15


def test_run_is_deterministic(tmp_path, capsys):
    args = ["run", "--problem", "sine2d", "--n", "6", "--t-final", "0.01"]
    assert main(args + ["--out", str(tmp_path / "a"), "--quad-points"]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--quad-points"]) == EXIT_OK
    capsys.readouterr()
    a = (tmp_path / "a" / "sine2d_primal_t0.01.csv").read_bytes()
    b = (tmp_path / "b" / "sine2d_primal_t0.01.csv").read_bytes()
    assert a == b
    head = a.decode().splitlines()
    assert head[0] == "x,y,rho,vx,vy,p,D,mx,my,E"
    # 2D control points for K=2: Lobatto x Gauss, Gauss x Lobatto, Gauss x Gauss, 6 x 6 each
    assert len(head) == 1 + 36 * 3 * 36


def test_no_pcp_riemann_exits_with_solver_failure(tmp_path, capsys):
    code, _, err = _run(["run", "--problem", "riemann1d", "--n", "100", "--no-pcp", "--out", str(tmp_path)], capsys)
    assert code == EXIT_SOLVER
    assert "FAILURE" in err and "step" in err


def test_theta_bound_is_a_config_error(tmp_path, capsys):
    code, _, err = _run(["run", "--problem", "sine1d", "--n", "10", "--theta", "0.9", "--out", str(tmp_path)], capsys)
    assert code == EXIT_CONFIG and "bound" in err
    code, _, _ = _run(
        ["run", "--problem", "sine1d", "--n", "10", "--theta", "0.4", "--unsafe", "--t-final", "0.005", "--out", str(tmp_path)],
        capsys,
    )
    assert code == EXIT_OK


def test_unknown_problem_and_eos(tmp_path, capsys):
    assert _run(["run", "--problem", "nope", "--out", str(tmp_path)], capsys)[0] == EXIT_CONFIG
    assert _run(["run", "--eos", "vdw", "--n", "10", "--out", str(tmp_path)], capsys)[0] == EXIT_CONFIG


def test_converge_table(tmp_path, capsys):
    code, out, _ = _run(["converge", "--problem", "sine1d", "--ns", "10,20", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    rows = (tmp_path / "sine1d_errors.csv").read_text().splitlines()
    assert rows[0] == "N,l1_error,l1_order,l2_error,l2_order"
    assert rows[1].split(",")[2] == ""
    assert 2.5 < float(rows[2].split(",")[2]) < 3.5
    assert "l1 error" in out


def test_converge_needs_exact_solution(tmp_path, capsys):
    code, _, err = _run(["converge", "--problem", "blast", "--ns", "10", "--out", str(tmp_path)], capsys)
    assert code == EXIT_CONFIG and "closed-form" in err


def test_validate_pass_and_fail(capsys):
    code, out, _ = _run(["validate", "ryu", "--trials", "2000"], capsys)
    assert code == EXIT_OK and "all pass" in out
    code, out, _ = _run(["validate", "ideal:3.0", "--trials", "2000"], capsys)
    assert code == EXIT_PROPERTY and "FAIL" in out


def test_reference_command(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PCPCDG_CACHE", str(tmp_path / "cache"))
    code, out, _ = _run(["reference", "--problem", "blast", "--n", "40", "--t-final", "0.01", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    assert (tmp_path / "blast_reference_N40.csv").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[problem]\nproblem = riemann1d\nn = 64\n\n[solver]\nt-final = 0.1\nintegrator = rk3\npcp = false\n")
    vals = read_config(cfg)
    assert vals["n"] == (64,) and vals["t_final"] == 0.1 and vals["pcp"] is False
    args = build_parser().parse_args(["run", "--config", str(cfg), "--n", "32"])
    rc, extra = resolve(args)
    assert rc.problem == "riemann1d" and rc.n == (32,) and rc.integrator == "rk3" and rc.pcp is False


def test_bad_config_value(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[s]\nk = two\n")
    assert _run(["run", "--config", str(cfg)], capsys)[0] == EXIT_CONFIG
    assert _run(["run", "--config", str(tmp_path / "missing.ini")], capsys)[0] == EXIT_CONFIG


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pcpcdg", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "blast" in r.stdout
