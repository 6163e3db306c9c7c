import pytest
import yaml

from risbeam.config.scenario import scenario_from_mapping
from risbeam.core.geometry import build_element_grid
from risbeam.utils.print_utils import set_quiet

FULL_SIZE = {
    "f_c_hz": 30e9,
    "bandwidth_hz": 4e9,
    "radius_m": 1.0,
    "l_tx_m": 0.5,
    "l_dt_m": 5.0,
    "gamma_c_deg": 10.0,
}


def make_scenario(**changes):
    data = dict(FULL_SIZE)
    data.update(changes)
    return scenario_from_mapping({k: v for k, v in data.items() if v is not None})


@pytest.fixture(autouse=True)
def quiet_output():
    set_quiet(True)
    yield
    set_quiet(False)


@pytest.fixture
def full_mapping():
    return dict(FULL_SIZE)


@pytest.fixture
def desk():
    """Tilted desk-size scenario (R = 0.25 m, gamma_c = 10 deg)."""
    return make_scenario(radius_m=0.25, n_l_samples=512)


@pytest.fixture
def desk_boresight():
    return make_scenario(radius_m=0.25, gamma_c_deg=0.0, n_l_samples=512)


@pytest.fixture
def desk_grid(desk):
    return build_element_grid(desk)


@pytest.fixture
def write_yaml(tmp_path):
    """Write a mapping to a temporary YAML file and return its path."""

    def _write(data, name="scenario.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
        return path

    return _write
