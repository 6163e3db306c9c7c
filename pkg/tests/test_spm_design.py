import math

import numpy as np
import pytest
from scipy import integrate

from risbeam.config.config import JACOBIAN_STEP_FRACTION, SPEED_OF_LIGHT
from risbeam.core.channel import beampattern, frequency_grid
from risbeam.core.evaluation import gain_spread_db
from risbeam.core.geometry import build_element_grid, path_sum_bounds, plane_tangency
from risbeam.core.spm_design import (
    SAMPLED_FUNCTION_COLUMNS,
    SampledFunction,
    amplitude_modulation_boresight,
    amplitude_modulation_general,
    design_wideband_profile,
    jacobian_weight,
    l_samples,
    map_phase_to_elements,
    narrowband_phase,
    run_design,
    spm_instantaneous_frequency,
    spm_phase,
)
from risbeam.errors import ContractViolation, DomainError
from tests.conftest import make_scenario


def wrapped_distance(a, b):
    d = np.mod(np.asarray(a) - np.asarray(b), 2 * math.pi)
    return np.minimum(d, 2 * math.pi - d)


@pytest.fixture(scope="module")
def boresight_full():
    cfg = make_scenario(gamma_c_deg=0.0, element_spacing_m=0.02, n_l_samples=1024)
    grid = build_element_grid(cfg)
    return cfg, grid, path_sum_bounds(grid)


@pytest.fixture(scope="module")
def tilted_full():
    cfg = make_scenario(gamma_c_deg=30.0, l_dt_m=1.0, element_spacing_m=0.02, n_l_samples=512)
    grid = build_element_grid(cfg)
    return cfg, grid, path_sum_bounds(grid)


def test_sampled_function_rejects_bad_grids():
    with pytest.raises(ContractViolation):
        SampledFunction(l_grid=np.array([1.0, 2.0, 4.0]), values=np.ones(3), kind="amplitude")
    with pytest.raises(ContractViolation):
        SampledFunction(l_grid=np.array([2.0, 1.0]), values=np.ones(2), kind="phase")
    with pytest.raises(ContractViolation):
        SampledFunction(l_grid=np.linspace(1, 2, 3), values=np.ones(3), kind="gain")


def test_sampled_function_frame():
    f = SampledFunction(l_grid=np.linspace(1, 2, 5), values=np.arange(5.0), kind="phase")
    frame = f.to_frame()
    assert list(frame.columns) == SAMPLED_FUNCTION_COLUMNS
    assert f.step == pytest.approx(0.25)


def test_narrowband_phase_at_origin(desk_boresight):
    grid = build_element_grid(desk_boresight)
    origin = int(np.flatnonzero((grid.x == 0) & (grid.y == 0))[0])
    expected = 2 * math.pi * desk_boresight.f_c_hz * 5.5 / SPEED_OF_LIGHT
    assert wrapped_distance(narrowband_phase(grid).phases[origin], expected) < 1e-9


def test_narrowband_phase_vanishes_on_whole_wavelengths(desk_boresight):
    grid = build_element_grid(desk_boresight)
    profile = narrowband_phase(grid)
    cycles = desk_boresight.f_c_hz * grid.l_sum / SPEED_OF_LIGHT
    phase_from_cycles = 2 * math.pi * (cycles - np.round(cycles))
    assert np.all(wrapped_distance(profile.phases, phase_from_cycles) < 1e-9)


def test_boresight_amplitude_is_reciprocal(boresight_full):
    cfg, _, bounds = boresight_full
    a = amplitude_modulation_boresight(l_samples(bounds, 64), cfg)
    assert a.values[0] / a.values[-1] == pytest.approx(bounds.l_max / bounds.l_min)
    assert np.all(np.diff(a.values) < 0)


def test_boresight_amplitude_refuses_tilt(desk):
    with pytest.raises(ContractViolation):
        amplitude_modulation_boresight(np.linspace(5.5, 5.6, 4), desk)


def test_jacobian_weight_positive_and_mirror_symmetric(tilted_full):
    cfg, _, bounds = tilted_full
    l = 0.5 * (bounds.l_min + bounds.l_max)
    for theta in np.linspace(-1.4, 1.4, 9):
        k = jacobian_weight(l, theta, cfg, bounds=bounds)
        assert k > 0
        assert jacobian_weight(l, math.pi - theta, cfg, bounds=bounds) == pytest.approx(k, rel=1e-9)


def test_jacobian_weight_below_tangency_is_domain_error(tilted_full):
    cfg, _, bounds = tilted_full
    l_tangent, _ = plane_tangency(cfg)
    with pytest.raises(DomainError):
        jacobian_weight(l_tangent, 0.0, cfg, bounds=bounds)


def test_jacobian_default_step_follows_path_sum_span():
    # the plane tangency point lies outside this small disk
    cfg = make_scenario(radius_m=0.05, gamma_c_deg=30.0, l_dt_m=1.0)
    bounds = path_sum_bounds(build_element_grid(cfg))
    assert not bounds.tangent_point_inside
    l = 0.5 * (bounds.l_min + bounds.l_max)
    step = JACOBIAN_STEP_FRACTION * (bounds.l_max - bounds.l_min)
    for theta in (-0.5, 0.0, 2.0):
        expected = jacobian_weight(l, theta, cfg, step=step)
        assert jacobian_weight(l, theta, cfg, bounds=bounds) == expected
        assert jacobian_weight(l, theta, cfg) == expected


@pytest.mark.parametrize("fraction", [0.2, 0.5, 0.9])
def test_boresight_circle_integral(boresight_full, fraction):
    cfg, _, bounds = boresight_full
    l = bounds.l_min + fraction * (bounds.l_max - bounds.l_min)
    total, _ = integrate.quad(lambda t: jacobian_weight(l, t, cfg, bounds=bounds), -0.5 * math.pi, 1.5 * math.pi)
    assert total == pytest.approx(2 * math.pi / l, rel=5e-3)


def test_general_amplitude_matches_boresight_shortcut(boresight_full):
    cfg, _, bounds = boresight_full
    l_grid = l_samples(bounds, 33)
    general = amplitude_modulation_general(l_grid, cfg, bounds)
    shortcut = amplitude_modulation_boresight(l_grid, cfg)
    np.testing.assert_allclose(general.values / shortcut.values, 2 * math.pi, rtol=5e-3)


def test_general_amplitude_positive_and_continuous(tilted_full):
    cfg, _, bounds = tilted_full
    assert bounds.l_mid is not None
    a = amplitude_modulation_general(l_samples(bounds, 65), cfg, bounds)
    assert np.all(a.values > 0)

    eps = 1e-7 * (bounds.l_max - bounds.l_min)
    around = amplitude_modulation_general(np.array([bounds.l_mid - eps, bounds.l_mid + eps]), cfg, bounds)
    assert around.values[1] == pytest.approx(around.values[0], rel=0.01)


def test_general_amplitude_outside_interval_is_domain_error(tilted_full):
    cfg, _, bounds = tilted_full
    with pytest.raises(DomainError):
        amplitude_modulation_general(np.array([bounds.l_min, bounds.l_max * 1.01]), cfg, bounds)


def test_general_amplitude_same_with_workers(tilted_full):
    cfg, _, bounds = tilted_full
    l_grid = l_samples(bounds, 16)
    serial = amplitude_modulation_general(l_grid, cfg, bounds, n_jobs=1)
    parallel = amplitude_modulation_general(l_grid, cfg, bounds, n_jobs=2)
    assert np.array_equal(serial.values, parallel.values)


def test_inst_freq_endpoints_exact(desk):
    a = SampledFunction(l_grid=np.linspace(5.5, 5.6, 257), values=np.linspace(1.0, 3.0, 257), kind="amplitude")
    phi_prime = spm_instantaneous_frequency(a, desk)
    edge = math.pi * desk.bandwidth_hz / SPEED_OF_LIGHT
    assert phi_prime.values[0] == -edge
    assert phi_prime.values[-1] == edge
    assert np.all(np.diff(phi_prime.values) > 0)


def test_band_guard_widens_inst_freq(desk):
    a = SampledFunction(l_grid=np.linspace(5.5, 5.6, 257), values=np.linspace(1.0, 3.0, 257), kind="amplitude")
    plain = spm_instantaneous_frequency(a, desk)
    guarded = spm_instantaneous_frequency(a, desk, band_guard=0.25)
    edge = math.pi * desk.bandwidth_hz * 1.25 / SPEED_OF_LIGHT
    assert guarded.values[0] == -edge
    assert guarded.values[-1] == edge
    np.testing.assert_allclose(guarded.values, 1.25 * plain.values, rtol=1e-12, atol=1e-9)
    with pytest.raises(ContractViolation):
        spm_instantaneous_frequency(a, desk, band_guard=-0.1)


def test_design_spreads_over_guarded_band(desk_boresight):
    cfg = desk_boresight.replace(n_l_samples=256)
    design = run_design(cfg)
    edge = math.pi * cfg.design_bandwidth_hz / SPEED_OF_LIGHT
    assert cfg.design_bandwidth_hz == pytest.approx(1.35 * cfg.bandwidth_hz)
    assert design.inst_freq.values[0] == pytest.approx(-edge, rel=1e-12)
    assert design.inst_freq.values[-1] == pytest.approx(edge, rel=1e-12)

    unguarded = run_design(cfg.replace(band_guard=0.0))
    assert unguarded.inst_freq.values[-1] == math.pi * cfg.bandwidth_hz / SPEED_OF_LIGHT


def test_inst_freq_rejects_non_positive_amplitude(desk):
    values = np.ones(8)
    values[3] = 0.0
    a = SampledFunction(l_grid=np.linspace(5.5, 5.6, 8), values=values, kind="amplitude")
    with pytest.raises(ContractViolation):
        spm_instantaneous_frequency(a, desk)
    with pytest.raises(ContractViolation):
        spm_phase(SampledFunction(l_grid=np.linspace(5.5, 5.6, 8), values=np.ones(8), kind="amplitude"))


def test_constant_amplitude_gives_linear_chirp(desk):
    l_min, l_max = 5.5, 6.2
    l_grid = np.linspace(l_min, l_max, 1001)
    a = SampledFunction(l_grid=l_grid, values=np.full(l_grid.size, 2.0), kind="amplitude")
    phi_prime = spm_instantaneous_frequency(a, desk)
    edge = math.pi * desk.bandwidth_hz / SPEED_OF_LIGHT
    np.testing.assert_allclose(phi_prime.values, edge * (2 * (l_grid - l_min) / (l_max - l_min) - 1), atol=1e-9)

    phi = spm_phase(phi_prime)
    u = l_grid - l_min
    closed_form = edge * (u ** 2 / (l_max - l_min) - u)
    np.testing.assert_allclose(phi.values, closed_form, atol=1e-9)
    assert phi.values[0] == 0.0

    crossing = int(np.argmin(np.abs(phi_prime.values)))
    assert abs(int(np.argmin(phi.values)) - crossing) <= 1


def test_phase_is_convex(tilted_full):
    cfg, grid, _ = tilted_full
    design = run_design(cfg, grid=grid)
    assert design.phase.values[0] == 0.0
    assert np.all(np.diff(design.phase.values, 2) >= -1e-12)
    assert np.all(np.diff(design.inst_freq.values) > 0)


def test_mapping_anchors_and_depends_on_l_only(boresight_full):
    cfg, grid, _ = boresight_full
    design = run_design(cfg, grid=grid)
    profile = map_phase_to_elements(design.phase, grid)
    origin = int(np.flatnonzero((grid.x == 0) & (grid.y == 0))[0])
    assert wrapped_distance(profile.phases[origin], 0.0) < 1e-9

    # (x, y) and (-x, y) share the path sum on boresight
    lookup = {(x, y): p for x, y, p in zip(grid.x, grid.y, profile.phases)}
    for x, y, p in zip(grid.x[:200], grid.y[:200], profile.phases[:200]):
        assert lookup[(-x, y)] == p


def test_mapping_ring_phases_are_lipschitz(boresight_full):
    cfg, grid, _ = boresight_full
    design = run_design(cfg, grid=grid)
    profile = map_phase_to_elements(design.phase, grid)
    r = np.hypot(grid.x, grid.y)
    ring = np.abs(r - 0.6) < grid.spacing / 10
    assert np.count_nonzero(ring) > 1
    bound = np.max(np.abs(design.inst_freq.values)) * np.ptp(grid.l_sum[ring]) + 1e-12
    assert np.all(wrapped_distance(profile.phases[ring], profile.phases[ring][0]) <= bound)


def test_mapping_outside_grid_is_contract_violation(boresight_full):
    cfg, _, _ = boresight_full
    design = run_design(cfg)
    bigger = build_element_grid(cfg.replace(radius_m=1.5))
    with pytest.raises(ContractViolation):
        map_phase_to_elements(design.phase, bigger)


def test_vanishing_band_reduces_to_narrowband(boresight_full):
    cfg, grid, _ = boresight_full
    design = run_design(cfg.replace(bandwidth_hz=1.0), grid=grid)
    assert np.all(wrapped_distance(design.wideband.phases, design.narrowband.phases) < 1e-6)


def test_refining_l_grid_barely_moves_phases(boresight_full):
    cfg, grid, _ = boresight_full
    coarse = design_wideband_profile(cfg.replace(n_l_samples=4096), grid=grid)
    fine = design_wideband_profile(cfg.replace(n_l_samples=8192), grid=grid)
    assert np.all(wrapped_distance(coarse.phases, fine.phases) < 1e-3)
    assert coarse.kind == "wideband"


def test_band_guard_lifts_band_edges():
    cfg = make_scenario(gamma_c_deg=0.0, l_dt_m=1.0, element_spacing_m=0.01, n_l_samples=2048)
    grid = build_element_grid(cfg)
    freqs = frequency_grid(cfg, 41)
    guarded = beampattern(grid, run_design(cfg, grid=grid).wideband, freqs, n_jobs=2)
    plain = beampattern(grid, run_design(cfg.replace(band_guard=0.0), grid=grid).wideband, freqs, n_jobs=2)

    spread = gain_spread_db(guarded, freqs[0], freqs[-1])
    assert spread < 8.0
    assert spread < gain_spread_db(plain, freqs[0], freqs[-1])
    peak = guarded.gain_db.max()
    assert guarded.gain_db[0] > peak - 6.0
    assert guarded.gain_db[-1] > peak - 6.0


@pytest.mark.slow
def test_tilted_wideband_is_flat_at_full_scale():
    cfg = make_scenario(gamma_c_deg=30.0, l_dt_m=1.0)
    design = run_design(cfg, n_jobs=4)
    freqs = frequency_grid(cfg)
    wb = beampattern(design.grid, design.wideband, freqs, n_jobs=4)
    nb = beampattern(design.grid, design.narrowband, freqs, n_jobs=4)
    assert gain_spread_db(wb, freqs[0], freqs[-1]) < 8.0
    assert gain_spread_db(nb, freqs[0], freqs[-1]) > 25.0


@pytest.mark.slow
def test_wideband_rolls_off_outside_band():
    cfg = make_scenario(gamma_c_deg=0.0, l_dt_m=1.0)
    design = run_design(cfg)
    in_band = beampattern(design.grid, design.wideband, frequency_grid(cfg), n_jobs=4)
    # past the guarded design band
    start = cfg.f_c_hz + 0.5 * cfg.design_bandwidth_hz + 0.15 * cfg.bandwidth_hz
    outside = np.linspace(start, start + 0.15 * cfg.bandwidth_hz, 40)
    out_band = beampattern(design.grid, design.wideband, outside, n_jobs=4)
    assert np.mean(out_band.gain_db) <= np.mean(in_band.gain_db) - 10.0
