"""
Brute-force validators for the geometry, the amplitude modulation and the SPM
design. Each check recomputes its reference independently of the code it
audits: residuals use raw distances, the histogram check bins lattice elements,
and the Riemann check integrates over the disk directly in polar coordinates.
"""

import functools
import math
from typing import Callable, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, computed_field
from scipy import integrate, interpolate, optimize

from risbeam.config.config import ORACLE_THRESHOLDS, SPEED_OF_LIGHT
from risbeam.core.channel import amplitude_coefficient, siso_gain
from risbeam.core.geometry import ElementGrid, build_element_grid, ellipse_section, path_sum_bounds
from risbeam.core.spm_design import (
    SampledFunction,
    amplitude_modulation,
    amplitude_modulation_general,
    l_samples,
    narrowband_phase,
    spm_instantaneous_frequency,
    spm_phase,
)
from risbeam.errors import InconclusiveCheck

HISTOGRAM_REFINE_ELEMENTS = 100_000  # lattice size run_all audits A(l) against
HISTOGRAM_MIN_PER_BIN = 16
HISTOGRAM_MIN_OCCUPIED = 20
HISTOGRAM_EDGE_FRACTION = 0.05
HISTOGRAM_SUBSAMPLES = 8
SPM_INTERIOR = (0.2, 0.8)


class ValidationCheck(BaseModel):
    name: str
    metric: float
    threshold: float
    passed: bool
    detail: str = ""


class ValidationReport(BaseModel):
    """Outcome of a set of checks; passes only if every check passes."""

    checks: List[ValidationCheck]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows(self) -> List[Dict[str, str]]:
        return [{"check": c.name, "metric": f"{c.metric:.3e}", "threshold": f"{c.threshold:.1e}",
                 "result": "PASS" if c.passed else "FAIL"} for c in self.checks]


def _entry(name: str, metric: float, threshold: float, detail: str = "") -> ValidationCheck:
    return ValidationCheck(name=name, metric=float(metric), threshold=float(threshold),
                           passed=bool(metric < threshold), detail=detail)


def _grid_for(cfg, grid: Optional[ElementGrid]) -> ElementGrid:
    return build_element_grid(cfg) if grid is None else grid


def check_ellipse_residuals(cfg, n_l: int = 64, n_theta: int = 128, grid: Optional[ElementGrid] = None,
                            threshold: float = ORACLE_THRESHOLDS["ellipse_residuals"]) -> ValidationCheck:
    """
    max |l_TX + l_DT - l| / l over points of the parameterised sections.

    With n_l = 1 the single section is the one at l_max and the metric also
    includes how far its closest approach to the origin is from R.
    """
    bounds = path_sum_bounds(_grid_for(cfg, grid))
    if n_l == 1:
        l_values = np.array([bounds.l_max])
    else:
        l_values = np.linspace(bounds.l_min, bounds.l_max, n_l + 1)[1:]

    tx = np.array([0.0, 0.0, cfg.l_tx_m])
    dt = np.array([0.0, cfg.l_dt_m * math.sin(cfg.gamma_rad), cfg.l_dt_m * math.cos(cfg.gamma_rad)])
    theta = np.linspace(-0.5 * math.pi, 1.5 * math.pi, n_theta)

    worst = 0.0
    for l in l_values:
        x, y = ellipse_section(float(l), cfg, clip=False).point(theta)
        pts = np.stack([x, y, np.zeros_like(x)], axis=1)
        total = np.linalg.norm(pts - tx, axis=1) + np.linalg.norm(pts - dt, axis=1)
        worst = max(worst, float(np.max(np.abs(total - l)) / l))

    detail = f"{l_values.size} sections x {n_theta} points"
    if n_l == 1:
        section = ellipse_section(bounds.l_max, cfg, clip=False)

        def radius_at(t):
            px, py = section.point(t)
            return float(np.hypot(px, py))

        coarse = np.linspace(-0.5 * math.pi, 1.5 * math.pi, 4 * n_theta + 1)
        k = int(np.argmin([radius_at(t) for t in coarse]))
        step = coarse[1] - coarse[0]
        touch = optimize.minimize_scalar(radius_at, bounds=(coarse[k] - step, coarse[k] + step),
                                         method="bounded", options={"xatol": 1e-13})
        gap = abs(float(touch.fun) - cfg.radius_m) / cfg.radius_m
        worst = max(worst, gap)
        detail += f"; boundary gap {gap:.2e} R"
    return _entry("ellipse_residuals", worst, threshold, detail)


def check_amplitude_histogram(cfg, n_bins: int = 64, grid: Optional[ElementGrid] = None,
                              threshold: float = ORACLE_THRESHOLDS["amplitude_histogram"],
                              n_jobs: int = 1, refine_to: Optional[int] = None) -> ValidationCheck:
    """
    Lattice pushforward of dx dy / (l_TX l_DT) onto l, against the integral of A(l) per bin.

    The caller's lattice is audited as given. With refine_to, a lattice holding
    fewer elements is first replaced by a finer one of about that size.

    Raises:
        InconclusiveCheck: fewer than 16 elements per bin, or fewer than 20
            bins receive elements
    """
    grid = _grid_for(cfg, grid)
    detail = ""
    if refine_to is not None and grid.count < refine_to:
        detail = f" (refined from {grid.count})"
        spacing = math.sqrt(math.pi * cfg.radius_m ** 2 / refine_to)
        grid = build_element_grid(cfg.replace(element_spacing_m=spacing))
    if grid.count < HISTOGRAM_MIN_PER_BIN * n_bins:
        raise InconclusiveCheck(f"{grid.count} elements for {n_bins} bins; "
                                f"at least {HISTOGRAM_MIN_PER_BIN * n_bins} needed")
    bounds = path_sum_bounds(grid)

    edges = np.linspace(bounds.l_min, bounds.l_max, n_bins + 1)
    weights = grid.spacing ** 2 / (grid.l_tx_len * grid.l_dt_len)
    mass, _ = np.histogram(np.clip(grid.l_sum, edges[0], edges[-1]), bins=edges, weights=weights)
    occupied = int(np.count_nonzero(mass))
    if occupied < HISTOGRAM_MIN_OCCUPIED:
        raise InconclusiveCheck(f"only {occupied} of {n_bins} bins hold elements")

    fine = np.linspace(bounds.l_min, bounds.l_max, n_bins * HISTOGRAM_SUBSAMPLES + 1)
    amplitude = amplitude_modulation_general(fine, cfg, bounds, n_jobs=n_jobs).values
    expected = np.array([
        integrate.trapezoid(amplitude[i * HISTOGRAM_SUBSAMPLES:(i + 1) * HISTOGRAM_SUBSAMPLES + 1],
                            fine[i * HISTOGRAM_SUBSAMPLES:(i + 1) * HISTOGRAM_SUBSAMPLES + 1])
        for i in range(n_bins)
    ])

    skip = int(round(HISTOGRAM_EDGE_FRACTION * n_bins))
    interior = slice(skip, n_bins - skip)
    rel = (mass[interior] - expected[interior]) / expected[interior]
    rms = float(np.sqrt(np.mean(rel ** 2)))
    return _entry("amplitude_histogram", rms, threshold,
                  f"{grid.count} elements{detail}, spacing {grid.spacing:.3e} m, {occupied} occupied bins")


def check_spm_prediction(cfg, n_points: int = 32, grid: Optional[ElementGrid] = None,
                         threshold: float = ORACLE_THRESHOLDS["spm_prediction"],
                         amplitude: Optional[SampledFunction] = None) -> ValidationCheck:
    """
    Median relative error between |g_a(w)|^2 from direct quadrature and 2 pi A^2 / phi''.

    Stationary points are taken in the 20%-80% part of the l interval, away
    from the endpoints where the stationary-phase estimate does not hold.
    A synthetic `amplitude` bypasses the geometry.
    """
    if amplitude is None:
        grid = _grid_for(cfg, grid)
        bounds = path_sum_bounds(grid)
        amplitude = amplitude_modulation(l_samples(bounds, cfg.n_l_samples), cfg, bounds)
    inst_freq = spm_instantaneous_frequency(amplitude, cfg)
    phase = spm_phase(inst_freq)
    l_grid = amplitude.l_grid
    curvature = np.gradient(inst_freq.values, l_grid)

    span = amplitude.l_max - amplitude.l_min
    n_dense = max(8 * l_grid.size, int(math.ceil(32.0 * span * cfg.bandwidth_hz / SPEED_OF_LIGHT)) + 1)
    dense = np.linspace(amplitude.l_min, amplitude.l_max, n_dense)
    a_dense = interpolate.CubicSpline(l_grid, amplitude.values)(dense)
    phi_dense = interpolate.CubicSpline(l_grid, phase.values)(dense)

    lo, hi = SPM_INTERIOR
    stationary = amplitude.l_min + span * np.linspace(lo, hi, n_points)
    errors = []
    for l_s in stationary:
        omega = np.interp(l_s, l_grid, inst_freq.values)
        g = integrate.trapezoid(a_dense * np.exp(1j * (phi_dense - omega * dense)), dense)
        a_s = np.interp(l_s, l_grid, amplitude.values)
        predicted = 2.0 * math.pi * a_s ** 2 / abs(np.interp(l_s, l_grid, curvature))
        errors.append(abs(abs(g) ** 2 / predicted - 1.0))

    median = float(np.median(errors))
    tbp = span * cfg.bandwidth_hz / SPEED_OF_LIGHT
    return _entry("spm_prediction", median, threshold, f"{n_points} stationary points, B*span/c = {tbp:.1f}")


def _disk_integral(cfg) -> float:
    """Integral of 1 / (l_TX l_DT) over the disk in polar coordinates."""
    l_tx2 = cfg.l_tx_m ** 2
    y_d = cfg.l_dt_m * math.sin(cfg.gamma_rad)
    z_d2 = (cfg.l_dt_m * math.cos(cfg.gamma_rad)) ** 2

    def integrand(r, t):
        x, y = r * math.cos(t), r * math.sin(t)
        return r / (math.sqrt(r * r + l_tx2) * math.sqrt(x * x + (y - y_d) ** 2 + z_d2))

    value, _ = integrate.dblquad(integrand, 0.0, 2.0 * math.pi, 0.0, cfg.radius_m, epsabs=0.0, epsrel=1e-10)
    return value


def check_riemann_consistency(cfg, grid: Optional[ElementGrid] = None,
                              threshold: float = ORACLE_THRESHOLDS["riemann_consistency"]) -> ValidationCheck:
    """
    Relative gap between the lattice sum g(f_c) Delta^2 / eta and the disk integral.

    At f_c the narrowband profile cancels every propagation phase, so both
    reduce to the sum / integral of 1 / (l_TX l_DT).
    """
    grid = _grid_for(cfg, grid)
    gain = siso_gain(grid, narrowband_phase(grid), cfg.f_c_hz)
    discrete = abs(gain) * grid.spacing ** 2 / float(amplitude_coefficient(cfg.f_c_hz))
    continuous = _disk_integral(cfg)
    return _entry("riemann_consistency", abs(discrete - continuous) / abs(continuous), threshold,
                  f"{grid.count} elements, spacing {grid.spacing:.3e} m")


def check_reduction_consistency(cfg, grid: Optional[ElementGrid] = None, n_l: int = 513,
                                threshold: float = ORACLE_THRESHOLDS["reduction_consistency"],
                                n_jobs: int = 1) -> ValidationCheck:
    """Integral of A(l) over [l_min, l_max] against the same quantity integrated over the disk."""
    bounds = path_sum_bounds(_grid_for(cfg, grid))
    l_grid = np.linspace(bounds.l_min, bounds.l_max, n_l)
    amplitude = amplitude_modulation_general(l_grid, cfg, bounds, n_jobs=n_jobs)
    reduced = integrate.simpson(amplitude.values, x=l_grid)
    continuous = _disk_integral(cfg)
    return _entry("reduction_consistency", abs(reduced - continuous) / continuous, threshold,
                  f"{n_l} path-sum samples")


CHECKS: Dict[str, Callable[..., ValidationCheck]] = {
    "ellipse_residuals": check_ellipse_residuals,
    "amplitude_histogram": functools.partial(check_amplitude_histogram, refine_to=HISTOGRAM_REFINE_ELEMENTS),
    "spm_prediction": check_spm_prediction,
    "riemann_consistency": check_riemann_consistency,
    "reduction_consistency": check_reduction_consistency,
}


def _run_check(name: str, cfg, grid: ElementGrid, threshold: float) -> ValidationCheck:
    try:
        return CHECKS[name](cfg, grid=grid, threshold=threshold)
    except InconclusiveCheck as e:
        return ValidationCheck(name=name, metric=float("nan"), threshold=threshold, passed=False,
                               detail=f"inconclusive: {e}")


def run_all(cfg, thresholds: Optional[Dict[str, float]] = None, n_jobs: int = 1,
            grid: Optional[ElementGrid] = None) -> ValidationReport:
    """Run every check (concurrently when n_jobs > 1) and aggregate them in a fixed order."""
    limits = dict(ORACLE_THRESHOLDS)
    limits.update(thresholds or {})
    grid = _grid_for(cfg, grid)
    checks = Parallel(n_jobs=n_jobs, backend="threading")(
        delayed(_run_check)(name, cfg, grid, limits[name]) for name in CHECKS
    )
    return ValidationReport(checks=list(checks))
