from pathlib import Path

import numpy as np
import pytest

from cvmaps.cli.deps import load_config
from cvmaps.services.sweep_service import SweepService
from cvmaps.services.validation_service import ValidationService

pytestmark = pytest.mark.slow

BASELINE_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "baseline.json"


@pytest.fixture(scope="module")
def baseline_sweep():
    config = load_config(BASELINE_CONFIG)
    reports, summary = SweepService().evaluate(config)
    return config, reports, summary


@pytest.fixture(scope="module")
def baseline_validation(baseline_sweep):
    config, _, _ = baseline_sweep
    return ValidationService().run(config)


def _errors(summary, measure):
    return [row.max_abs_error for row in summary if row.measure == measure]


@pytest.mark.parametrize("measure", ["tsallis_q5", "von_neumann", "linear"])
def test_entropies_at_33_points(baseline_sweep, measure):
    _, _, summary = baseline_sweep
    finest = [row for row in summary if row.measure == measure and row.grid_n == 33]
    assert finest[0].max_abs_error <= 5e-3
    errors = _errors(summary, measure)
    assert all(b <= a + 1e-9 for a, b in zip(errors, errors[1:]))


def test_log_negativity_at_33_points(baseline_sweep):
    _, _, summary = baseline_sweep
    errors = _errors(summary, "log_negativity")
    assert [row.grid_n for row in summary if row.measure == "log_negativity"] == [13, 17, 23, 33]
    assert errors[-1] <= 1e-2
    assert all(b <= a + 1e-9 for a, b in zip(errors, errors[1:]))


def test_numeric_periodicity(baseline_sweep):
    config, reports, _ = baseline_sweep
    for label in ("tsallis_q5", "von_neumann", "linear"):
        series = np.array([r.numeric for r in reports if r.kind.label == label and r.grid_n == 33])
        assert abs(series[0] - series[-1]) <= 5e-3


def test_validation_suite_passes(baseline_validation):
    report = baseline_validation
    assert report.passed, [f"{c.module}: {c.property} ({c.observed} vs {c.expected})" for c in report.failures]


def test_minima_are_required_on_the_coarsest_grid(baseline_validation):
    minima = [c for c in baseline_validation.checks if "minimum at a multiple of the period (n=5)" in c.property]
    assert len(minima) == 3
    assert all(c.required and c.passed for c in minima)
