import json
import subprocess
import sys

import numpy as np
import pytest

from perorbit import __version__
from perorbit.cli import config_hash, main, parse_range, run_config, build_parser
from perorbit.model import build_duffing, save_system


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range_inclusive():
    assert np.allclose(parse_range("0:0.05:0.2"), [0.0, 0.05, 0.1, 0.15, 0.2])
    assert np.allclose(parse_range("0.2:0.02:2").size, 91)
    assert parse_range("1.5").tolist() == [1.5]


def test_certify_duffing_exists(capsys):
    code, out, _ = run(capsys, "certify", "--builtin", "duffing", "--kappa", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["overall"] == "exists" and rep["r"] == 0.0


def test_certify_counterexample1(capsys):
    code, out, _ = run(capsys, "certify", "--builtin", "counterexample1")
    rep = json.loads(out)
    assert code == 0 and rep["overall"] == "no-periodic-orbit"
    assert rep["thresholds"]["f_threshold"] == pytest.approx(0.011777, abs=1e-6)


def test_certify_pendulum(capsys):
    code, out, _ = run(capsys, "certify", "--builtin", "pendulum", "--cp", "1", "--fbar", "2")
    assert json.loads(out)["overall"] == "no-periodic-orbit"


def test_certify_from_file(capsys, tmp_path):
    path = tmp_path / "duffing.json"
    save_system(build_duffing(kappa=-1.0), path)
    code, out, _ = run(capsys, "certify", "--input", str(path))
    assert code == 0 and json.loads(out)["overall"] == "exists"


def test_hb_linear_example(capsys):
    code, out, _ = run(capsys, "hb", "--builtin", "lin_sys", "--K", "5")
    assert code == 0 and json.loads(out)["amplitude"][0] == pytest.approx(0.0025, abs=1e-4)
    code, out, _ = run(capsys, "hb", "--builtin", "lin_sys", "--K", "20")
    assert json.loads(out)["amplitude"][0] == pytest.approx(0.0049937, abs=1e-5)


def test_hb_nonconvergence_exit_code(capsys):
    code, out, _ = run(capsys, "hb", "--builtin", "quadratic", "--f", "2.6", "--K", "7")
    assert code == 2
    assert json.loads(out)["status"] != "converged"


def test_input_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "certify", "--input", str(bad))[0] == 1
    assert run(capsys, "certify", "--input", str(tmp_path / "missing.json"))[0] == 1
    assert run(capsys, "certify", "--builtin", "nosuch")[0] == 1
    assert run(capsys, "certify", "--builtin", "duffing", "--param", "bogus=1")[0] == 1
    assert run(capsys, "certify", "--builtin", "duffing", "--param", "novalue")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["hb", "--no-such-flag"])
    assert exc.value.code == 1


def test_sweep_outputs_are_byte_identical(capsys, tmp_path):
    argv = ["sweep", "--builtin", "duffing", "--f", "0.01", "--c", "0.02", "--start", "0.6", "--stop", "1.5",
            "--ds", "0.05", "--K", "5", "--stability", "--seed", "7"]
    assert run(capsys, *argv, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *argv, "--out", str(tmp_path / "b"))[0] == 0
    a = (tmp_path / "a" / "branch.csv").read_bytes()
    assert a == (tmp_path / "b" / "branch.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == f"# perorbit {__version__}"
    assert lines[1].startswith("# config ") and lines[2] == "# seed 7"
    assert lines[3].startswith("Omega,amp1")
    # full double precision in every numeric field
    assert lines[4].split(",")[1] == f"{float(lines[4].split(',')[1]):.17g}"


def test_sweep_in_forcing_level(capsys):
    code, out, _ = run(capsys, "sweep", "--builtin", "duffing", "--sweep-param", "f", "--start", "0",
                       "--stop", "0.2", "--ds", "0.02", "--omega", "1.0")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows[0].startswith("f,") and len(rows) > 3


def test_config_hash_ignores_output_directory():
    p = build_parser()
    a = p.parse_args(["hb", "--builtin", "duffing", "--out", "x"])
    b = p.parse_args(["hb", "--builtin", "duffing", "--out", "y"])
    c = p.parse_args(["hb", "--builtin", "duffing", "--K", "9"])
    assert config_hash(run_config(a)) == config_hash(run_config(b))
    assert config_hash(run_config(a)) != config_hash(run_config(c))


def test_floquet_map_writes_grid_and_boundary(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PERORBIT_JOBS", "1")
    code, out, _ = run(capsys, "floquet-map", "--a", "0:0.005:0.02", "--omega1", "0.9:0.1:1.1",
                       "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["cells"] == 15
    grid = (tmp_path / "stability_grid.csv").read_text().splitlines()
    assert grid[3] == "a,omega1,max_abs_rho,stable" and len(grid) == 4 + 15
    bnd = (tmp_path / "stability_boundary.csv").read_text().splitlines()
    assert bnd[3] == "a,omega1,max_abs_rho,multiplier"
    assert len(bnd) - 4 == summary["boundary_points"]


def test_repro_subset_summary(capsys, tmp_path):
    code, out, _ = run(capsys, "repro", "thresholds", "--out", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0].startswith("PASS [1]")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] and {c["criterion"] for c in summary["checks"]} == {1, 8}
    th = json.loads((tmp_path / "thresholds.json").read_text())
    assert th["c_inf"] == pytest.approx(1371.7577, abs=1e-4)


def test_repro_failure_exits_nonzero(capsys, tmp_path, monkeypatch):
    from perorbit import reproduce

    monkeypatch.setattr(reproduce, "F_THRESHOLD", 1.0)
    code, _, err = run(capsys, "repro", "thresholds", "--out", str(tmp_path))
    assert code == 2 and "failed" in err


def test_console_script_version():
    res = subprocess.run([sys.executable, "-m", "perorbit.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
