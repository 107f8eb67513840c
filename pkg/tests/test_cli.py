import csv
import json
import math
import subprocess
import sys

import pytest

from eqarea import cli
from eqarea.errors import SolverError

from conftest import SCENARIOS


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def tri_zero_three(tmp_path):
    cfg = tmp_path / "tri.yaml"
    cfg.write_text((SCENARIOS / "triangle.yaml").read_text().replace(
        "output_times: {start: 0, stop: 10, num: 51}", "output_times: [0, 3]"))
    return cfg


def test_run_triangle_shocks_csv(tmp_path, tri_zero_three):
    assert cli.main(["run", str(tri_zero_three), "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "shocks.csv")
    assert [(r["t"], r["X"], r["uL"], r["uR"], r["speed"]) for r in rows] == [
        ("0.0", "1.0", "1.0", "0.0", "0.5"), ("3.0", "2.0", "0.5", "0.0", "0.25")]
    assert rows[0]["provenance"] == "isolated"
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["total_area"] == pytest.approx([0.5, 0.5], abs=1e-15)
    assert summary["conservation_ok"] and summary["wall_time_s"] > 0
    samples = _rows(tmp_path / "o" / "curve_samples.csv")
    assert {r["branch"] for r in samples} == {"weak", "fold"}
    assert list(samples[0]) == ["t", "s", "x", "u", "branch"]


def test_outputs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["run", str(SCENARIOS / "two_step.yaml"), "--out", str(tmp_path / d)]) == 0
    for name in ("shocks.csv", "curve_samples.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_arctan_run_has_shocks_only_after_breaking(tmp_path):
    assert cli.main(["run", str(SCENARIOS / "arctan.yaml"), "--out", str(tmp_path)]) == 0
    times = sorted({float(r["t"]) for r in _rows(tmp_path / "shocks.csv")})
    assert times and min(times) > 1.0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["breaking_time"] == pytest.approx(1.0, abs=1e-12)
    xs = [float(r["x"]) for r in _rows(tmp_path / "curve_samples.csv") if r["t"] == "5.0" and r["branch"] == "weak"]
    # the left fan spreads from x = -10 to -10 + 5 (1 + arctan 10)
    assert sum(-10 < x < -10 + 5 * (1 + math.atan(10)) for x in xs) >= 10


def test_empty_times_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text((SCENARIOS / "riemann.yaml").read_text().replace("output_times: [0, 0.5, 1, 2]", "output_times: []"))
    assert cli.main(["run", str(cfg), "--out", str(tmp_path)]) == 2
    assert "output_times" in capsys.readouterr().out


def test_solver_error_exit_three(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise SolverError("at t = 1.0: synthetic")
    monkeypatch.setattr(cli, "track_curve", boom)
    assert cli.main(["run", str(SCENARIOS / "riemann.yaml"), "--out", str(tmp_path)]) == 3
    assert cli.main(["compare", str(SCENARIOS / "riemann.yaml"), "--out", str(tmp_path)]) == 3


def test_tolerance_breach_exit_four(tmp_path):
    cfg = tmp_path / "tight.yaml"
    cfg.write_text((SCENARIOS / "two_step.yaml").read_text() + "options:\n  tolerances: {conservation: 1.0e-30}\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 4


def test_compare_reports(tmp_path, capsys):
    assert cli.main(["compare", str(SCENARIOS / "triangle.yaml"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "compare.json").read_text())
    assert rep["max_dX"] < 1e-13 and rep["max_l1"] < 1e-12
    assert cli.main(["compare", str(SCENARIOS / "two_step.yaml"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "compare.json").read_text())
    assert rep["collisions"][0]["dt_star"] < 1e-10
    assert cli.main(["compare", str(SCENARIOS / "riemann.yaml"), "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "compare.json").read_text())["max_dX"] < 1e-12
    assert "vs riemann" in capsys.readouterr().out


def test_compare_rejects_inapplicable_oracle(tmp_path):
    assert cli.main(["compare", str(SCENARIOS / "riemann.yaml"), "--oracle", "triangle", "--out", str(tmp_path)]) == 2
    assert cli.main(["compare", str(SCENARIOS / "arctan.yaml"), "--oracle", "front-tracking",
                     "--out", str(tmp_path)]) == 2


def test_convergence_table(tmp_path, capsys):
    assert cli.main(["convergence", str(SCENARIOS / "triangle.yaml"), "--ladder", "1", "0.1", "--t-end", "10",
                     "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "convergence.csv")
    assert [r["dt"] for r in rows] == ["1.0", "0.1"]
    assert all(float(r["error"]) < 1e-12 for r in rows)


def test_convergence_needs_reference(tmp_path):
    cfg = tmp_path / "plain.yaml"
    cfg.write_text((SCENARIOS / "arctan.yaml").read_text().replace("oracle: godunov\n", ""))
    assert cli.main(["convergence", str(cfg), "--ladder", "0.5", "--out", str(tmp_path)]) == 2


def test_batch_with_jobs(tmp_path, capsys):
    assert cli.main(["run", str(SCENARIOS / "batch.yaml"), "--jobs", "2", "--out", str(tmp_path)]) == 0
    for name in ("triangle", "two_step", "riemann", "arctan"):
        assert (tmp_path / name / "summary.json").exists()


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "eqarea", "run", str(SCENARIOS / "riemann.yaml"), "--mode",
                          "appendix", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert json.loads((tmp_path / "summary.json").read_text())["mode"] == "appendix"
