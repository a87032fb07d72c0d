import json

import numpy as np
import pytest

from densitycut import __version__, cli, export

SCHEMA = {"config", "version", "phi", "lambda2", "threshold", "cheeger", "buser", "timings_ms",
          "residual"}


def run_json(capsys, argv):
    rc = cli.run(argv)
    out = capsys.readouterr().out
    return rc, (json.loads(out) if rc == 0 else None)


def test_verify_admissible_holds(capsys):
    rc, rep = run_json(capsys, ["verify", "--density", "abs_eps", "--eps", "1e-3",
                                "--abg", "1", "2", "3"])
    assert rc == 0
    assert SCHEMA <= set(rep)
    assert rep["cheeger"]["holds"] is True and rep["buser"]["holds"] is True
    assert rep["version"] == __version__
    assert rep["config"]["density"] == {"family": "abs_eps", "params": {"eps": 1e-3}}


def test_verify_111_buser_fails(capsys):
    rc, rep = run_json(capsys, ["verify", "--density", "abs_eps", "--eps", "1e-3",
                                "--abg", "1", "1", "1"])
    assert rc == 0 and rep["buser"]["holds"] is False


def test_partition2d_writes_bisecting_mask(tmp_path):
    out = tmp_path / "run"
    rc = cli.run(["partition2d", "--density", "uniform", "--h", "0.05", "--out", str(out)])
    assert rc == 0
    rep = json.loads((out / "report.json").read_text())
    mask = export.read_pgm((out / "mask.pgm").read_text())
    assert mask.shape == (21, 21)
    assert 0.4 < mask.mean() < 0.6
    assert rep["lambda2"] == pytest.approx(np.pi ** 2, rel=0.02)


def test_iterate2d_trail(capsys):
    rc, rep = run_json(capsys, ["iterate2d", "--density", "half_moons", "--h", "0.1"])
    assert rc == 0
    assert len(rep["details"]["rounds"]) >= 1


def test_analyze1d_sweep_csv(tmp_path):
    out = tmp_path / "sweep"
    rc = cli.run(["analyze1d", "--density", "abs_eps", "--sweep-eps", "0.1,0.01",
                  "--abg", "1", "1", "1", "--out", str(out)])
    assert rc == 0
    lines = (out / "curve.csv").read_text().splitlines()
    assert lines[0].startswith("alpha,beta,gamma,eps")
    assert len(lines) == 3


def test_mollify_and_scaling_checks(capsys):
    rc, rep = run_json(capsys, ["mollify-check"])
    assert rc == 0 and rep["details"]["grad_bound_holds"]
    assert all(c["passed"] for c in rep["details"]["sandwich"])
    rc, rep = run_json(capsys, ["scaling-check", "--density", "abs_eps", "--eps", "0.01"])
    assert rc == 0 and rep["details"]["max_error"] < 1e-6


def test_cluster_command(tmp_path, capsys):
    rng = np.random.default_rng(0)
    pts = np.vstack([rng.normal(0, 0.1, (10, 2)), rng.normal(1.5, 0.1, (10, 2))])
    path = tmp_path / "pts.csv"
    np.savetxt(path, pts, delimiter=",")
    rc, rep = run_json(capsys, ["cluster", "--points", str(path)])
    assert rc == 0
    assert rep["details"]["sizes_13"] == [10, 10]
    assert "conductance_baseline" in rep["details"]


def test_determinism_byte_identical(capsys):
    argv = ["analyze1d", "--density", "plateau", "--n", "10"]
    cli.run(argv)
    a = capsys.readouterr().out
    cli.run(argv)
    b = capsys.readouterr().out
    assert a == b
    assert json.loads(a)["timings_ms"] == {}


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"density": {"family": "abs_eps", "params": {"eps": 0.1}},
                               "exponents": [1, 2, 3], "mesh_n": 256}))
    rc, rep = run_json(capsys, ["analyze1d", "--config", str(cfg), "--eps", "0.05"])
    assert rc == 0
    assert rep["config"]["density"]["params"]["eps"] == 0.05
    assert rep["config"]["mesh_n"] == 256


@pytest.mark.parametrize("argv", [
    ["verify", "--density", "nope"],
    ["partition2d", "--density", "uniform", "--h", "0.5"],
    ["analyze1d", "--density", "abs_eps"],
    ["analyze1d", "--density", "uniform", "--tol", "-1"],
    ["cluster"],
    ["frobnicate"],
])
def test_validation_errors_exit_2(argv, capsys):
    assert cli.run(argv) == 2


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"density": {"family": "uniform"}, "colour": "red"}))
    assert cli.run(["analyze1d", "--config", str(cfg)]) == 2


def test_solver_failure_exit_3(monkeypatch, capsys):
    from densitycut import oned
    from densitycut.errors import SolverNoConverge

    def boom(*a, **k):
        raise SolverNoConverge(10, 1.0)

    monkeypatch.setattr(oned, "analyze_1d", boom)
    assert cli.run(["analyze1d", "--density", "uniform"]) == 3
