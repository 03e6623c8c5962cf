import csv
import json

import pytest

from cvmaps.cli.commands import sweep as sweep_command
from cvmaps.cli.commands import validate as validate_command
from cvmaps.core.exceptions import EXIT_CONFIG_ERROR, EXIT_FAILURE, EXIT_OK
from cvmaps.main import main
from cvmaps.schemas.report import CheckResult, ValidationReport

HEADER = "t,grid_n,measure,numeric,analytic,abs_error\n"
ENTROPY_FILES = ("tsallis_q5.csv", "von_neumann.csv", "linear.csv")


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2))
    return path


def read_rows(path):
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def test_sweep_writes_tables(tmp_path, small_config_data):
    config = write_config(tmp_path, small_config_data)
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config), "--out", str(out)]) == EXIT_OK
    for name in ENTROPY_FILES + ("log_negativity.csv",):
        text = (out / name).read_text()
        assert text.startswith(HEADER)
        assert "\r" not in text
    summary = (out / "summary.csv").read_text()
    assert summary.startswith("grid_n,measure,max_abs_error,island_converged\n")
    assert len(summary.splitlines()) == 1 + 3 * 2 + 1


@pytest.mark.parametrize(
    "name,expected",
    [("tsallis_q5.csv", 3.110e-3), ("von_neumann.csv", 1.752e-2), ("linear.csv", 4.9875e-3), ("log_negativity.csv", 0.14439)],
)
def test_sweep_analytic_column_at_t0(tmp_path, small_config_data, name, expected):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(write_config(tmp_path, small_config_data)), "--out", str(out)]) == EXIT_OK
    rows = [row for row in read_rows(out / name) if float(row["t"]) == 0.0]
    assert rows
    for row in rows:
        assert float(row["analytic"]) == pytest.approx(expected, abs=1e-5)
        assert float(row["abs_error"]) == abs(float(row["numeric"]) - float(row["analytic"]))


def test_analytic_column_does_not_depend_on_grid(tmp_path, small_config_data):
    out = tmp_path / "out"
    main(["sweep", "--config", str(write_config(tmp_path, small_config_data)), "--out", str(out)])
    by_time = {}
    for row in read_rows(out / "von_neumann.csv"):
        by_time.setdefault(row["t"], set()).add(row["analytic"])
    assert len(by_time) == 5
    assert all(len(values) == 1 for values in by_time.values())


def test_sweep_is_byte_identical_on_rerun(tmp_path, small_config_data):
    config = write_config(tmp_path, small_config_data)
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["sweep", "--config", str(config), "--out", str(first)]) == EXIT_OK
    assert main(["sweep", "--config", str(config), "--out", str(second)]) == EXIT_OK
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_sweep_uses_config_output_dir(tmp_path, small_config_data):
    assert main(["sweep", "--config", str(write_config(tmp_path, small_config_data))]) == EXIT_OK
    assert (tmp_path / "results" / "summary.csv").exists()


def test_vacuum_input_has_no_entanglement_at_period_minima(tmp_path, baseline_config_data):
    data = dict(baseline_config_data)
    data.update({"squeeze": {"beta": 0.0}, "time": {"samples": 3}, "grids": [9], "negativity_grids": [9]})
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(write_config(tmp_path, data)), "--out", str(out)]) == EXIT_OK
    for name in ENTROPY_FILES + ("log_negativity.csv",):
        rows = read_rows(out / name)
        for row in (rows[0], rows[-1]):
            assert float(row["analytic"]) == pytest.approx(0.0, abs=1e-12)
            assert float(row["numeric"]) == pytest.approx(0.0, abs=1e-9)


def test_coarse_grid_warns_about_island(tmp_path, small_config_data, capsys):
    data = dict(small_config_data, grids=[3], negativity_grids=[])
    assert main(["sweep", "--config", str(write_config(tmp_path, data)), "--out", str(tmp_path / "out")]) == EXIT_OK
    err = capsys.readouterr().err
    assert "island has not converged" in err
    assert "narrowest marginal width" in err
    assert "negativity_grids is empty" in err


def test_covariance_command(tmp_path, small_config_data):
    data = dict(small_config_data, grids=[9, 17])
    out = tmp_path / "out"
    assert main(["covariance", "--config", str(write_config(tmp_path, data)), "--out", str(out)]) == EXIT_OK
    for name in ("sigma_q1q1", "sigma_p1p1", "sigma_q1p1", "sigma_p1p2"):
        rows = read_rows(out / f"{name}.csv")
        assert len(rows) == 5 * 2
        assert {row["measure"] for row in rows} == {name}


def test_qutrit_demo(tmp_path, capsys):
    assert main(["qutrit-demo", "--out", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "maximally_mixed: remove index 0 [ok]" in text
    assert "+0.625000+0.000000j" in text
    assert (tmp_path / "qutrit_demo.txt").read_text().strip() == text.strip()


@pytest.mark.parametrize(
    "change",
    [
        {"amplifier": {"omega_a": 1.0, "omega_b": 3.0, "omega_pump": 5.0, "kappa": -2.0, "Omega_override": 9.0}},
        {"schema_version": 2},
        {"grids": [4]},
        {"grids": []},
        {"unexpected": True},
        {"squeeze": {"beta": 0.05, "r": 0.1}},
        {"time": {"samples": 1}},
        {"measures": [{"kind": "tsallis", "q": 1.0}]},
    ],
)
def test_invalid_config_exits_with_config_error(tmp_path, baseline_config_data, change):
    data = dict(baseline_config_data)
    data.update(change)
    for command in ("sweep", "covariance", "validate"):
        assert main([command, "--config", str(write_config(tmp_path, data))]) == EXIT_CONFIG_ERROR


def test_unreadable_config(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG_ERROR
    broken = tmp_path / "broken.json"
    broken.write_text("{\n  \"schema_version\": 1,\n  oops\n}")
    assert main(["sweep", "--config", str(broken)]) == EXIT_CONFIG_ERROR


def test_usage_errors_exit_with_two(capsys):
    assert main([]) == EXIT_CONFIG_ERROR
    assert main(["plot"]) == EXIT_CONFIG_ERROR
    assert main(["sweep", "--bogus"]) == EXIT_CONFIG_ERROR


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert "cvmaps" in capsys.readouterr().out


def test_validation_failure_exits_with_one(tmp_path, small_config_data, monkeypatch, capsys):
    failing = ValidationReport(checks=[CheckResult(module="measures", property="spot value", passed=False, observed="1", expected="0")])
    monkeypatch.setattr(validate_command.validation_service, "run", lambda config: failing)
    assert main(["validate", "--config", str(write_config(tmp_path, small_config_data))]) == EXIT_FAILURE
    out = capsys.readouterr().out
    assert "FAIL measures: spot value" in out
    assert "0/1 checks passed" in out


def test_optional_check_failure_does_not_fail_validation(tmp_path, small_config_data, monkeypatch):
    report = ValidationReport(checks=[
        CheckResult(module="measures", property="extrema", passed=False, required=False),
        CheckResult(module="measures", property="spot value", passed=True),
    ])
    monkeypatch.setattr(validate_command.validation_service, "run", lambda config: report)
    assert main(["validate", "--config", str(write_config(tmp_path, small_config_data))]) == EXIT_OK


def test_unexpected_error_exits_with_one(tmp_path, small_config_data, monkeypatch):
    def explode(config, output_dir):
        raise RuntimeError("boom")

    monkeypatch.setattr(sweep_command.sweep_service, "run", explode)
    assert main(["sweep", "--config", str(write_config(tmp_path, small_config_data))]) == EXIT_FAILURE
