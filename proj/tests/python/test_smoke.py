import math
import os

import numpy as np
import pytest

import hessflow as hf

TORUS = """
[operator]
family = sigma_root
n = 2
k = 2

[grid]
topology = periodic
shape = [16, 16]
length = [2pi, 2pi]

[problem]
chi = 2
psi = constant(1.0)
phi_b = sum(0.5, cos_product(0.1, [1, 1], 0))
horizon = 0.2

[step]
dt = 0.05
"""


def test_sigma_and_operator_values():
    assert hf.sigma_k([1.0, 2.0, 3.0], 2) == pytest.approx(11.0)
    spec = hf.OperatorSpec.sigma_root(2, 3)
    assert hf.eval_f(spec, [1.0, 2.0, 3.0]) == pytest.approx(math.sqrt(11.0))
    g = np.array(hf.grad_f(spec, [1.0, 2.0, 3.0]))
    assert np.allclose(g / np.linalg.norm(g), np.array([5, 4, 3]) / math.sqrt(50))
    h = hf.hess_f(spec, [1.0, 2.0, 3.0])
    assert h.shape == (3, 3)
    assert np.linalg.eigvalsh(h).max() <= 1e-10


def test_cone_violation_is_raised():
    with pytest.raises(ValueError):
        hf.eval_f(hf.OperatorSpec.sigma_root(2, 2), [-1.0, 0.1])


def test_structure_report_sigma2():
    report = hf.check_structure(hf.OperatorSpec.sigma_root(2, 3), budget=2000)
    assert all(entry["holds"] for entry in report.values())
    assert report["euler_sum_lower_bound"]["constant"] == 0.0


def test_solve_returns_columns_and_field():
    result = hf.solve(TORUS)
    assert result["u"].shape == (16, 16)
    assert len(result["t"]) == 5
    assert result["t"][-1] == pytest.approx(0.2)
    assert result["stop_reason"] == "horizon"


def test_commands_and_files(tmp_path):
    code, out, err = hf.run_command("solve", TORUS, out_dir=str(tmp_path), quiet=True)
    assert code == hf.EXIT_SUCCESS, err
    table = hf.parse_csv((tmp_path / "monitor.csv").read_text())
    assert len(table["t"]) == 4
    snap = hf.read_snapshot(str(tmp_path / "snapshot_000004.hfld"))
    assert snap["values"].shape == (16, 16)
    assert snap["time"] == pytest.approx(0.2)

    code, _, err = hf.run_command("solve", TORUS.replace("k = 2", "k = 3"), quiet=True)
    assert code == hf.EXIT_VALIDATION_ERROR
    assert "line 5" in err


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    values = rng.standard_normal((6, 5))
    path = str(tmp_path / "f.hfld")
    hf.write_snapshot(path, values, [0.1, 0.2], time=1.5, topology="box")
    back = hf.read_snapshot(path)
    assert back["topology"] == "box"
    assert np.array_equal(back["values"], values)
    with open(path, "rb") as fh:
        first = fh.read()
    hf.write_snapshot(path, back["values"], back["spacing"], back["time"], back["topology"])
    with open(path, "rb") as fh:
        assert fh.read() == first


def test_report_svg_has_three_points():
    svg = hf.render_svg_report("t,a\n0,1\n1,2\n2,3\n")
    assert svg.count("<circle") == 3
