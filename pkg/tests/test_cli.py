import csv
import json
import math

import pytest

from proxevo.cli import (EXIT_BLOWUP, EXIT_CONFIG_ERROR, EXIT_OK,
                         compile_expression, main)
from proxevo.errors import ConfigError

REST_CONFIG = """
[problem]
dim = 1
horizon = 1.0
u0 = [0.0]
v0 = [0.0]
forcing = "0"

[problem.potential]
kind = "quadratic"
scale = 1.0

[solver]
n_steps = 50
picard_tol = 1e-10
"""

OSCILLATOR_CONFIG = """
[problem]
dim = 1
horizon = 1.0
u0 = [1.0]
v0 = [0.0]
forcing = "0"

[problem.potential]
kind = "quadratic"
scale = 1.0

[problem.coupling]
kind = "linear"
matrix = 2.0

[solver]
n_steps = 2000
picard_tol = 1e-10
"""

BLOWUP_CONFIG = """
[problem]
dim = 1
horizon = 2.0
u0 = [1.0]
v0 = [1.0]
forcing = "0"

[problem.coupling]
kind = "cubic"
sign = -1
coeff = 1.0

[solver]
n_steps = 60
picard_tol = 1e-9
mode = "local"
continuation = true
blowup_threshold = 1e6
"""

PDE_CONFIG = """
[problem]
horizon = 0.5

[problem.pde1d]
n_cells = 4
length = 1.0
u0 = "sin(pi * x)"
v0 = "0"
forcing = "0"

[problem.pde1d.psi]
kind = "quadratic"
scale = 1.0

[solver]
n_steps = 100
picard_tol = 1e-9
"""


def _write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_compile_expression_examples():
    f = compile_expression("sin(pi * t) + 1")
    assert f(0.5) == pytest.approx(2.0)
    g = compile_expression("t + x * u", variables=("t", "x", "u"))
    assert g(1.0, 2.0, 3.0) == 7.0
    assert compile_expression("e")(0.0) == pytest.approx(math.e)


def test_compile_expression_rejects_malicious_input():
    for src in ("__import__('os')", "open('/etc/passwd')", "t.__class__",
                "[1,2]", "lambda: 0", "'hi'", "exec('1')"):
        with pytest.raises(ConfigError):
            compile_expression(src)
    with pytest.raises(ConfigError):
        compile_expression("y + 1")  # unknown variable


def test_validate_good_and_bad(tmp_path, capsys):
    good = _write(tmp_path, REST_CONFIG)
    assert main(["validate", good]) == EXIT_OK
    assert "ok" in capsys.readouterr().out
    bad = _write(tmp_path, "[problem\n", name="bad.toml")
    assert main(["validate", bad]) == EXIT_CONFIG_ERROR
    assert main(["validate", str(tmp_path / "missing.toml")]) == EXIT_CONFIG_ERROR


def test_validate_rejects_bad_solver_mode(tmp_path):
    cfg = REST_CONFIG + '\nmode = "sideways"\n'
    assert main(["validate", _write(tmp_path, cfg)]) == EXIT_CONFIG_ERROR


def test_solve_rest_state(tmp_path):
    cfg = _write(tmp_path, REST_CONFIG)
    out = tmp_path / "out"
    assert main(["solve", cfg, "--out", str(out)]) == EXIT_OK
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 51
    assert all(float(r["u"]) == 0.0 and float(r["v"]) == 0.0 for r in rows)
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "ok"
    assert report["u_at_T"] == [0.0]
    assert (out / "summary.txt").read_text().startswith("solved on [0, 1]")


def test_solve_oscillator_value(tmp_path):
    from proxevo.suites import oscillator_closed_form
    cfg = _write(tmp_path, OSCILLATOR_CONFIG)
    out = tmp_path / "out"
    assert main(["solve", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["u_at_T"][0] == pytest.approx(oscillator_closed_form(1.0),
                                                abs=2e-3)


def test_solve_overrides(tmp_path):
    cfg = _write(tmp_path, OSCILLATOR_CONFIG)
    out = tmp_path / "out"
    assert main(["solve", cfg, "--n-steps", "40", "--tol", "1e-6",
                 "--out", str(out)]) == EXIT_OK
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 41


def test_solve_blowup_exit_code(tmp_path):
    cfg = _write(tmp_path, BLOWUP_CONFIG)
    out = tmp_path / "out"
    assert main(["solve", cfg, "--out", str(out)]) == EXIT_BLOWUP
    report = json.loads((out / "report.json").read_text())
    assert report["status"] == "blowup"
    assert 1.0 < report["blowup_time"] < 2.0
    assert report["blowup_norm"] >= 1e6


def test_solve_pde_config(tmp_path):
    cfg = _write(tmp_path, PDE_CONFIG)
    out = tmp_path / "out"
    assert main(["solve", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert len(report["u_at_T"]) == 3  # interior nodes of a 4-cell mesh


def test_solve_deterministic_output(tmp_path):
    cfg = _write(tmp_path, OSCILLATOR_CONFIG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["solve", cfg, "--out", str(out1)]) == EXIT_OK
    assert main(["solve", cfg, "--out", str(out2)]) == EXIT_OK
    assert (out1 / "trajectory.csv").read_bytes() \
        == (out2 / "trajectory.csv").read_bytes()
    assert (out1 / "report.json").read_bytes() \
        == (out2 / "report.json").read_bytes()


def test_unknown_suite_exit_code():
    assert main(["suite", "no_such_suite"]) == EXIT_CONFIG_ERROR


def test_suite_prox_oracle_passes(capsys):
    assert main(["suite", "prox_oracle"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
