import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from azrenyi import channels, cli, propcheck
from azrenyi.divergence import d_alpha_z, d_max, d_min
from azrenyi.propcheck import SuiteResult
from azrenyi.states import RandomSpec, pure_state, random_density


@pytest.fixture
def files(tmp_path):
    def put(name, M):
        path = tmp_path / name
        cli.write_matrix(str(path), M)
        return str(path)
    return put


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_matrix_round_trip_is_bit_identical(tmp_path):
    rho = random_density(RandomSpec(4, 2, 3))
    path = str(tmp_path / "rho.json")
    cli.write_matrix(path, rho, "r")
    back = cli.read_matrix(path)
    assert np.array_equal(back, rho)
    assert json.load(open(path))["label"] == "r"


def test_matrix_parse_errors():
    with pytest.raises(cli.InputError):
        cli.matrix_from_json({"dim": 2, "entries": [[[1, 0]]]})
    with pytest.raises(cli.InputError):
        cli.matrix_from_json({"dim": 2, "entries": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]})
    with pytest.raises(cli.InputError):
        cli.matrix_from_json({"entries": []})


def test_compute_preset_and_direct(capsys, files):
    rho, sigma = random_density(3, 1), random_density(3, 2)
    r, s = files("r.json", rho), files("s.json", sigma)
    code, out, _ = run(capsys, "compute", r, s, "--preset", "dmin")
    assert code == 0 and float(out) == d_min(rho, sigma)
    code, out, _ = run(capsys, "compute", r, s, "--alpha", 0.7, "--z", 1.3)
    assert code == 0 and float(out) == d_alpha_z(rho, sigma, 0.7, 1.3)
    code, out, _ = run(capsys, "compute", r, s, "--preset", "dmax", "--json")
    rec = json.loads(out)
    assert code == 0 and rec["value_bits"] == d_max(rho, sigma)


def test_compute_classical_example(capsys, files):
    r = files("r.json", np.diag([0.5, 0.5]))
    s = files("s.json", np.diag([0.75, 0.25]))
    code, out, _ = run(capsys, "compute", r, s, "--alpha", 2, "--z", 1)
    assert code == 0 and abs(float(out) - np.log2(4 / 3)) < 1e-12


def test_compute_line_through_alpha_one(capsys, files):
    rho, sigma = random_density(3, 4), random_density(3, 5)
    code, out, _ = run(capsys, "compute", files("r.json", rho), files("s.json", sigma),
                       "--alpha", 1, "--r", -1, "--json")
    rec = json.loads(out)
    assert code == 0 and np.isfinite(rec["value_bits"])


def test_support_violation_exit_code(capsys, files):
    r = files("r.json", np.diag([0.5, 0.5]))
    s = files("s.json", np.diag([1.0, 0.0]))
    code, _, err = run(capsys, "compute", r, s, "--alpha", 2, "--z", 1)
    assert code == cli.EXIT_SUPPORT and "support" in err


def test_bad_input_exit_code(capsys, tmp_path, files):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    s = files("s.json", np.eye(2) / 2)
    code, _, err = run(capsys, "compute", str(bad), s, "--alpha", 2, "--z", 1)
    assert code == cli.EXIT_PARSE and "invalid JSON" in err
    code, _, _ = run(capsys, "compute", str(tmp_path / "missing.json"), s, "--alpha", 2, "--z", 1)
    assert code == cli.EXIT_PARSE


def test_limit_commands(capsys, files):
    r = files("r.json", pure_state([1, 1, 0]))
    s = files("s.json", np.diag([0.5, 0.3, 0.2]))
    code, out, _ = run(capsys, "limit", r, s, "--which", "zero-zero")
    lines = out.split()
    assert code == 0 and lines[-2:] == ["pivots", "1"]
    rho, sigma = random_density(3, 6), random_density(3, 7)
    r, s = files("r2.json", rho), files("s2.json", sigma)
    code, out, _ = run(capsys, "limit", r, s, "--which", "alpha-inf", "--r", 1)
    assert code == 0 and abs(float(out) - d_max(rho, sigma)) < 1e-10
    code, _, _ = run(capsys, "limit", r, s, "--which", "alpha1")
    assert code == cli.EXIT_PARSE


def test_random_state_command(capsys, tmp_path):
    path = str(tmp_path / "x.json")
    code, _, _ = run(capsys, "random-state", "--dim", 3, "--rank", 2, "--seed", 4, "--out", path)
    M = cli.read_matrix(path)
    assert code == 0 and np.array_equal(M, random_density(RandomSpec(3, 2, 4)))
    code, _, _ = run(capsys, "random-state", "--dim", 3, "--rank", 5, "--seed", 4)
    assert code == cli.EXIT_PARSE


def test_random_state_prints_generated_seed(capsys):
    code, out, err = run(capsys, "random-state", "--dim", 2)
    assert code == 0 and err.startswith("seed=") and json.loads(out)["dim"] == 2


def test_scan_dpi_csv(capsys, tmp_path):
    js = tmp_path / "r.json"
    code, out, _ = run(capsys, "scan", "dpi", "--points", "0.5:0.5,3:1", "--dims", 2, "--trials", 5,
                       "--seed", 1, "--json-out", str(js))
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["region_class"] for r in rows] == ["proven", "known-false"]
    assert json.loads(js.read_text())["seed"] == 1


def test_scan_proven_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(channels, "dpi_check", lambda *a: 1.0)
    code, _, _ = run(capsys, "scan", "dpi", "--points", "0.5:0.5", "--trials", 2, "--seed", 0, "--jobs", 1)
    assert code == cli.EXIT_SCAN


def test_scan_concavity(capsys):
    code, out, _ = run(capsys, "scan", "concavity", "--p-grid", "0.5,2", "--q-grid", "0.5",
                       "--trials", 100, "--seed", 0, "--jobs", 1)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert rows[0]["region_class"] == "concave-proven" and rows[0]["concavity_failures"] == "0"
    assert rows[1]["region_class"] == "none" and int(rows[1]["concavity_failures"]) > 0


def test_check_report_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        code, _, err = run(capsys, "check", "axioms", "resolvent-bounds", "--trials", 10, "--seed", 5,
                           "--out", str(p))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["ok"] is True


def test_check_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(propcheck, "axiom_suite",
                        lambda **kw: SuiteResult("axioms", 1, [{"seed": 0, "magnitude": 1.0}], 1e-9))
    code, _, err = run(capsys, "check", "axioms")
    assert code == cli.EXIT_CHECK and "FAIL" in err


def test_check_conjecture_failures_do_not_fail(capsys, monkeypatch):
    monkeypatch.setattr(propcheck, "convexity_conjecture_suite",
                        lambda *a, **kw: SuiteResult("convexity", 1, [{"seed": 0}], 1e-9, asserted=False))
    code, _, _ = run(capsys, "check", "convexity")
    assert code == 0


def test_unknown_suite(capsys):
    code, _, _ = run(capsys, "check", "nope")
    assert code == cli.EXIT_PARSE


def test_entry_point_runs():
    out = subprocess.run([sys.executable, "-m", "azrenyi.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "compute" in out.stdout
