from __future__ import annotations

import csv
import json
import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from cknlab.cli import main
from cknlab.io import csv_text, fmt_float, to_json, write_atomic

from oracle_values import ORACLE

COPT = ORACLE[(4, "2", "2.5", "1")]["copt"]


def run(tmp_path, *args):
    return main([*args, "--out-dir", str(tmp_path)])


def read_csv(path):
    lines = path.read_text().splitlines()
    comments = [ln[2:] for ln in lines if ln.startswith("# ")]
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.reader(body))
    return comments, rows[0], rows[1:]


class TestIO:
    def test_fmt_float(self):
        assert fmt_float(0.1) == "1.0000000000000001e-01"
        assert float(fmt_float(math.pi)) == math.pi
        assert fmt_float(float("nan")) == "nan"

    def test_json(self):
        text = to_json({"a": 1.5, "b": [1, 2.0], "c": Fraction(4, 9), "d": float("inf"),
                        "e": np.bool_(True), "f": None})
        data = json.loads(text)
        assert data == {"a": 1.5, "b": [1, 2.0], "c": "4/9", "d": None, "e": True, "f": None}
        assert '"a": 1.5000000000000000e+00' in text

    def test_csv(self):
        text = csv_text(["x", "ok"], [(0.5, True), (2.0, np.bool_(False))], ["hello"])
        assert text.splitlines() == ["# hello", "x,ok", "5.0000000000000000e-01,PASS",
                                     "2.0000000000000000e+00,FAIL"]

    def test_atomic_write_replaces(self, tmp_path):
        path = tmp_path / "sub" / "f.txt"
        write_atomic(path, "one")
        write_atomic(path, "two")
        assert path.read_text() == "two"
        assert [p.name for p in path.parent.iterdir()] == ["f.txt"]


class TestCommands:
    def test_params(self, tmp_path, capsys):
        assert run(tmp_path, "params", "--n", "4", "--p", "2", "--q", "2.5", "--mu", "1") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["params"]["r"] == "3" and data["params"]["a"] == "4/9"
        assert data["params"]["a_float"] == pytest.approx(4 / 9, rel=1e-16)
        assert data["checks"]["exponent_identity"] == "0"
        assert data["checks"]["dilation_residual"] == "0"
        assert data["run_spec"]["command"] == "params"
        assert json.loads((tmp_path / "params.json").read_text()) == data

    def test_params_file(self, tmp_path):
        pf = tmp_path / "in.json"
        pf.write_text(json.dumps({"n": 5, "p": "2", "q": "2.5", "μ": "0.5"}))
        assert run(tmp_path, "params", "--params-file", str(pf)) == 0
        data = json.loads((tmp_path / "params.json").read_text())
        assert data["params"]["mu"] == "0.5" and data["params"]["n"] == 5

    def test_copt(self, tmp_path):
        assert run(tmp_path, "copt") == 0
        data = json.loads((tmp_path / "copt.json").read_text())
        assert data["copt_quadrature"] == pytest.approx(COPT, rel=1e-12)
        closed = data["copt_closed_form"]
        assert closed["experimental"] is True and closed["delta_source"] == "nu (default)"
        assert closed["ratio_to_quadrature"] == pytest.approx(1.0, rel=1e-12)

    def test_extremal_check(self, tmp_path):
        assert run(tmp_path, "extremal-check") == 0
        data = json.loads((tmp_path / "extremal_check.json").read_text())
        assert data["lambda_spread"] < 1e-8
        assert data["min_perturbation_change"] >= -1e-9
        _, header, rows = read_csv(tmp_path / "perturbations.csv")
        assert header[0] == "seed" and len(rows) == 20

    def test_curves(self, tmp_path):
        assert run(tmp_path, "curves", "--model", "euclidean:n=4", "--C-multiple", "1.0") == 0
        comments, header, rows = read_csv(tmp_path / "curves.csv")
        assert header == ["lambda", "F", "G", "H0", "F_prime", "ode_residual_G", "ineq_slack_F"]
        assert any(c.startswith("run_spec: ") for c in comments)
        vals = np.array(rows, dtype=float)
        np.testing.assert_allclose(vals[:, 1], vals[:, 2], rtol=1e-8)
        lam, F, Fp = vals[:, 0], vals[:, 1], vals[:, 4]
        consts = json.loads(next(c for c in comments if c.startswith("constants: "))[11:])
        rhs = float(consts["gamma_coeff"]) * (5 * F + lam * Fp) * F**0.5
        assert np.max(np.abs(vals[:, 6] / rhs)) < 1e-6
        assert all(len(cell.split("e")[0].replace("-", "").replace(".", "")) == 17
                   for cell in rows[0])

    def test_volume_bound_fail_on_cone(self, tmp_path, capsys):
        assert run(tmp_path, "volume-bound", "--model", "cone:n=4,c=0.5", "--C-multiple", "1.0",
                   "--C0", "1") == 0
        comments, header, rows = read_csv(tmp_path / "volume_bound.csv")
        assert "verdict: FAIL" in comments
        assert all(r[-1] == "FAIL" for r in rows)

    def test_volume_bound_pass(self, tmp_path):
        assert run(tmp_path, "volume-bound", "--rho", "0.5,1,2,10") == 0
        comments, _, rows = read_csv(tmp_path / "volume_bound.csv")
        assert "verdict: PASS" in comments and len(rows) == 4

    def test_audit(self, tmp_path):
        assert run(tmp_path, "audit", "--model", "cone:n=4,c=0.5") == 0
        data = json.loads((tmp_path / "audit.json").read_text())
        assert data["doubling_constant"] == pytest.approx(1.0)
        assert data["origin_density"] == pytest.approx(0.5)
        assert data["best_constant"]["best_constant"] == pytest.approx(0.5 ** (-1 / 9) * COPT,
                                                                       rel=1e-10)

    def test_minimize_family(self, tmp_path):
        assert run(tmp_path, "minimize", "--method", "golden_section") == 0
        data = json.loads((tmp_path / "minimize.json").read_text())
        assert data["best_quotient"] * COPT == pytest.approx(1.0, rel=1e-12)
        assert "backend" not in data

    def test_minimize_grid_writes_profile(self, tmp_path):
        assert run(tmp_path, "minimize", "--method", "coordinate_descent", "--grid-size", "64",
                   "--f-tol", "1e-5", "--seed", "4") == 0
        _, header, rows = read_csv(tmp_path / "best_profile.csv")
        assert header == ["t", "u"] and len(rows) == 64
        data = json.loads((tmp_path / "minimize.json").read_text())
        assert data["seed"] == 4 and data["config"]["grid_size"] == 64


class TestExitCodes:
    def test_invalid_params(self, tmp_path, capsys):
        assert run(tmp_path, "params", "--q", "3") == 2
        err = capsys.readouterr().err.strip().splitlines()
        assert len(err) == 1 and "p(q-1)/(p-1) < np/(n-p)" in err[0]

    def test_endpoint_flag(self, tmp_path):
        assert run(tmp_path, "copt", "--q", "3", "--allow-endpoint") == 0

    @pytest.mark.parametrize("args", [
        ["params", "--params-file", "/nonexistent.json"],
        ["copt", "--n", "4", "--model", "cone:n=5,c=0.5"],
        ["curves", "--C-multiple", "-1"],
        ["volume-bound", "--C0", "0.5"],
        ["copt", "--delta", "-10"],
        ["audit", "--model", "table:/nonexistent.csv,n=4"],
    ])
    def test_validation_failures(self, tmp_path, args, capsys):
        assert run(tmp_path, *args) == 2
        assert capsys.readouterr().err.startswith("cknlab: invalid input")

    def test_numerical_failure(self, tmp_path, capsys):
        code = run(tmp_path, "minimize", "--method", "coordinate_descent", "--grid-size", "32",
                   "--max-iters", "1", "--f-tol", "1e-12")
        assert code == 3
        assert capsys.readouterr().err.startswith("cknlab: numerical failure")

    def test_curve_below_copt_shows_violation(self, tmp_path):
        assert run(tmp_path, "curves", "--C-multiple", "0.5") == 0
        _, _, rows = read_csv(tmp_path / "curves.csv")
        assert all(float(r[6]) < 0 for r in rows)

    def test_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(tmp_path, "bogus")
        assert exc.value.code == 2


@pytest.mark.parametrize("args, name", [
    (["curves", "--model", "cone:n=4,c=0.5"], "curves.csv"),
    (["extremal-check"], "perturbations.csv"),
    (["minimize", "--method", "coordinate_descent", "--grid-size", "32", "--f-tol", "1e-4"],
     "minimize.json"),
])
def test_reruns_are_byte_identical(tmp_path, args, name):
    assert run(tmp_path, *args) == 0
    first = (tmp_path / name).read_bytes()
    assert run(tmp_path, *args) == 0
    assert (tmp_path / name).read_bytes() == first


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "cknlab.cli", "params", "--out-dir",
                          str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["params"]["nu"] == "3"
