"""Full-size scenarios on the R = 1 m aperture. Run with `pytest -m slow`."""

import numpy as np
import pytest

from risbeam.core.channel import beampattern, frequency_grid
from risbeam.core.evaluation import gain_spread_db, rate_sweep, sensing_comparison
from risbeam.core.spm_design import run_design
from tests.conftest import make_scenario

pytestmark = pytest.mark.slow

WORKERS = 4


def in_band_spreads(cfg):
    design = run_design(cfg, n_jobs=WORKERS)
    freqs = frequency_grid(cfg)
    spreads = {}
    for profile in (design.narrowband, design.wideband):
        bp = beampattern(design.grid, profile, freqs, n_jobs=WORKERS)
        spreads[profile.kind] = gain_spread_db(bp, freqs[0], freqs[-1])
    return spreads


def test_narrowband_profile_squints():
    spreads = in_band_spreads(make_scenario(l_dt_m=10.0, gamma_c_deg=0.0))
    assert spreads["narrowband"] >= 35.0


@pytest.mark.parametrize("l_dt", [1.0, 10.0, 100.0])
def test_wideband_profile_is_flat_on_boresight(l_dt):
    spreads = in_band_spreads(make_scenario(l_dt_m=l_dt, gamma_c_deg=0.0))
    assert spreads["wideband"] <= 8.0


@pytest.mark.parametrize("gamma_c", [10.0, 20.0, 30.0])
def test_wideband_profile_is_flat_off_boresight(gamma_c):
    spreads = in_band_spreads(make_scenario(l_dt_m=5.0, gamma_c_deg=gamma_c))
    assert spreads["wideband"] <= spreads["narrowband"] - 15.0


def test_rate_increment_over_placements():
    frame = rate_sweep(make_scenario(), [1.0, 2.5, 5.0, 7.5, 10.0], [0.0, 15.0, 30.0, 45.0], n_jobs=WORKERS)
    increments = frame["increment_pct"].to_numpy()
    assert np.all(increments > 0)
    assert np.mean((increments >= 5.0) & (increments <= 20.0)) >= 0.8


def test_wideband_profile_sharpens_range_resolution():
    cfg = make_scenario(l_dt_m=10.0, gamma_c_deg=0.0)
    design = run_design(cfg)
    _, _, reports = sensing_comparison(cfg, design.grid, [design.narrowband, design.wideband], n_jobs=WORKERS)
    assert reports["wideband"].resolution_ratio >= 1.8
