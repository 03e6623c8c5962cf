import json
from pathlib import Path

import numpy as np
import pytest

from cvmaps.cli.deps import parse_config
from cvmaps.quantum.gaussian_state import AmplifierParams, SqueezeParams, TwoModeSqueezedVacuum

ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = ROOT / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def baseline_params():
    return AmplifierParams(omega_a=1.0, omega_b=3.0, omega_pump=5.0, kappa=2.0, Omega_override=9.0)


@pytest.fixture
def unit_params():
    """Baseline couplings with a unit-frequency idler, so both modes share the vacuum width."""
    return AmplifierParams(omega_a=1.0, omega_b=1.0, omega_pump=5.0, kappa=2.0, Omega_override=9.0)


@pytest.fixture
def baseline_squeeze():
    return SqueezeParams.from_beta(0.05)


@pytest.fixture
def vacuum_state():
    return TwoModeSqueezedVacuum(0.0, 1.0)


@pytest.fixture
def baseline_config_data():
    return json.loads((CONFIG_DIR / "baseline.json").read_text())


@pytest.fixture
def baseline_config(baseline_config_data):
    return parse_config(json.dumps(baseline_config_data))


@pytest.fixture
def small_config_data(baseline_config_data, tmp_path):
    """Baseline physics on a short sweep that keeps the CLI tests fast."""
    data = dict(baseline_config_data)
    data["time"] = {"start": 0.0, "samples": 5}
    data["grids"] = [5, 9]
    data["negativity_grids"] = [7]
    data["output_dir"] = str(tmp_path / "results")
    return data


@pytest.fixture
def small_config(small_config_data):
    return parse_config(json.dumps(small_config_data))
