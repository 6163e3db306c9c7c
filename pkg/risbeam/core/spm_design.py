"""
Stationary-phase wideband phase design.

The aperture integral is reduced to a 1-D Fourier-type integral over the path
sum l, with an amplitude modulation A(l) given by the measure of the aperture
on each constant-l conic. Choosing phi_des'' proportional to A^2 makes the
stationary-phase estimate of |g|^2 constant over the band; the boundary
conditions phi_des'(l_min) = -pi B / c and phi_des'(l_max) = +pi B / c fix the
proportionality constant. run_design widens B by the scenario band_guard so
that the band edges get interior stationary points.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import integrate

from risbeam.config.config import (
    ENDPOINT_INSET_FRACTION,
    JACOBIAN_STEP_FRACTION,
    QUAD_EPSREL,
    SPEED_OF_LIGHT,
)
from risbeam.core.channel import TWO_PI, PhaseProfile
from risbeam.core.geometry import (
    ElementGrid,
    PathSumBounds,
    build_element_grid,
    ellipse_section,
    path_sum_bounds,
)
from risbeam.errors import ContractViolation, DomainError

FUNCTION_KINDS = ("amplitude", "inst_freq", "phase")
SAMPLED_FUNCTION_COLUMNS = ["l_m", "value"]


@dataclass(frozen=True)
class SampledFunction:
    """Real function sampled on a uniform path-sum grid."""

    l_grid: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise ContractViolation(f"unknown sampled-function kind '{self.kind}'")
        l_grid = np.asarray(self.l_grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if l_grid.ndim != 1 or l_grid.shape != values.shape or l_grid.size < 2:
            raise ContractViolation("l_grid and values must be 1-D arrays of equal length >= 2")
        steps = np.diff(l_grid)
        if np.any(steps <= 0):
            raise ContractViolation("l_grid must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ContractViolation("l_grid must be uniform")
        object.__setattr__(self, "l_grid", l_grid)
        object.__setattr__(self, "values", values)

    @property
    def l_min(self) -> float:
        return float(self.l_grid[0])

    @property
    def l_max(self) -> float:
        return float(self.l_grid[-1])

    @property
    def step(self) -> float:
        return float(self.l_grid[1] - self.l_grid[0])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"l_m": self.l_grid, "value": self.values}, columns=SAMPLED_FUNCTION_COLUMNS)


def l_samples(bounds: PathSumBounds, n: int) -> np.ndarray:
    """Uniform path-sum grid with first = l_min and last = l_max."""
    return np.linspace(bounds.l_min, bounds.l_max, n)


def narrowband_phase(grid: ElementGrid) -> PhaseProfile:
    """phi_std = 2 pi f_c l / c, wrapped to [0, 2 pi)."""
    cycles = grid.scenario.f_c_hz * grid.l_sum / SPEED_OF_LIGHT
    return PhaseProfile.wrapped(TWO_PI * np.mod(cycles, 1.0), kind="narrowband")


def amplitude_modulation_boresight(l_grid, cfg) -> SampledFunction:
    """
    a(l) = 1/l, exact when the DT is on the boresight axis (constant 2 pi dropped).

    Raises:
        ContractViolation: scenario is not boresight
    """
    if not cfg.is_boresight:
        raise ContractViolation(f"boresight amplitude requested with gamma_c = {math.degrees(cfg.gamma_c_rad):.6g} deg")
    l_grid = np.asarray(l_grid, dtype=float)
    return SampledFunction(l_grid=l_grid, values=1.0 / l_grid, kind="amplitude")


class _JacobianKernel:
    """K(l, theta) for one fixed l, as a scalar function of theta."""

    def __init__(self, l: float, cfg, step: float):
        if not step > 0:
            raise ContractViolation("Jacobian step must be positive")
        centre = ellipse_section(l, cfg, clip=False)
        lower = ellipse_section(l - step, cfg, clip=False)
        upper = ellipse_section(l + step, cfg, clip=False)

        self.a = centre.a_e
        self.b = centre.b_e
        self.y_e = centre.y_e
        self.da = (upper.a_e - lower.a_e) / (2.0 * step)
        self.db = (upper.b_e - lower.b_e) / (2.0 * step)
        self.dy_e = (upper.y_e - lower.y_e) / (2.0 * step)

        self.l_tx2 = cfg.l_tx_m ** 2
        self.y_d = cfg.l_dt_m * math.sin(cfg.gamma_rad)
        self.z_d2 = (cfg.l_dt_m * math.cos(cfg.gamma_rad)) ** 2

    def __call__(self, theta: float) -> float:
        c, s = math.cos(theta), math.sin(theta)
        x = self.a * c
        y = self.y_e + self.b * s
        x_l = self.da * c
        y_l = self.dy_e + self.db * s
        x_t = -self.a * s
        y_t = self.b * c
        jac = abs(x_l * y_t - x_t * y_l)
        l_tx = math.sqrt(x * x + y * y + self.l_tx2)
        l_dt = math.sqrt(x * x + (y - self.y_d) ** 2 + self.z_d2)
        return jac / (l_tx * l_dt)


def _default_step(cfg, bounds: Optional[PathSumBounds]) -> float:
    if bounds is None:
        bounds = path_sum_bounds(build_element_grid(cfg))
    return JACOBIAN_STEP_FRACTION * (bounds.l_max - bounds.l_min)


def jacobian_weight(l: float, theta: float, cfg, step: Optional[float] = None,
                    bounds: Optional[PathSumBounds] = None) -> float:
    """
    K(l, theta) = |d(x, y)/d(l, theta)| / (l_TX l_DT) on the section at path sum l.

    Args:
        l: Path sum inside (l_min, l_max)
        theta: Section parameter in [-pi/2, 3pi/2]
        cfg: Scenario
        step: Central-difference step in l; defaults to 1e-6 of l_max - l_min
        bounds: Path-sum interval for the default step (computed from cfg when omitted)

    Raises:
        DomainError: the section at l - step is empty (l at or below tangency)
    """
    step = _default_step(cfg, bounds) if step is None else step
    return _JacobianKernel(l, cfg, step)(theta)


def _arc_integral(l: float, cfg, step: float) -> float:
    section = ellipse_section(l, cfg)
    kernel = _JacobianKernel(l, cfg, step)
    total = 0.0
    for lo, hi in section.arcs:
        if hi <= lo:
            continue
        value, _ = integrate.quad(kernel, lo, hi, epsrel=QUAD_EPSREL, epsabs=0.0, limit=200)
        total += value
    return total


def amplitude_modulation_general(l_grid, cfg, bounds: PathSumBounds, n_jobs: int = 1) -> SampledFunction:
    """
    A(l) = integral of K(l, theta) over the arcs of the section lying on the aperture.

    Samples at the interval ends are evaluated slightly inside it, where the
    section is non-degenerate.

    Raises:
        DomainError: a sample lies outside [l_min, l_max]
    """
    l_grid = np.asarray(l_grid, dtype=float)
    span = bounds.l_max - bounds.l_min
    slack = 1e-9 * bounds.l_max
    if l_grid.min() < bounds.l_min - slack or l_grid.max() > bounds.l_max + slack:
        raise DomainError(f"path sums outside [{bounds.l_min}, {bounds.l_max}] have an empty arc")

    step = _default_step(cfg, bounds)
    inset = ENDPOINT_INSET_FRACTION * span
    l_eval = np.clip(l_grid, bounds.l_min + inset, bounds.l_max - inset)

    if n_jobs == 1:
        values = [_arc_integral(float(l), cfg, step) for l in l_eval]
    else:
        values = Parallel(n_jobs=n_jobs)(delayed(_arc_integral)(float(l), cfg, step) for l in l_eval)
    return SampledFunction(l_grid=l_grid, values=np.asarray(values, dtype=float), kind="amplitude")


def spm_instantaneous_frequency(amplitude: SampledFunction, cfg, band_guard: float = 0.0) -> SampledFunction:
    """
    phi_des'(l) = (2 pi B_d / c) * int_{l_min}^{l} A^2 / int_{l_min}^{l_max} A^2 - pi B_d / c.

    B_d = B (1 + band_guard). With no guard the band edges f_c +/- B/2 have
    their stationary points on l_min and l_max, where only half of the
    stationary-phase contribution is collected; a guard moves them inside.

    Raises:
        ContractViolation: A is not an amplitude function, has a non-positive
            sample, or band_guard is negative
    """
    if amplitude.kind != "amplitude":
        raise ContractViolation(f"expected an amplitude function, got kind '{amplitude.kind}'")
    if np.any(amplitude.values <= 0):
        raise ContractViolation("amplitude modulation must be strictly positive")
    if band_guard < 0:
        raise ContractViolation(f"band guard must be non-negative, got {band_guard}")

    edge = math.pi * cfg.bandwidth_hz * (1.0 + band_guard) / SPEED_OF_LIGHT
    energy = integrate.cumulative_trapezoid(amplitude.values ** 2, amplitude.l_grid, initial=0.0)
    values = 2.0 * edge * (energy / energy[-1]) - edge
    values[0] = -edge
    values[-1] = edge
    return SampledFunction(l_grid=amplitude.l_grid, values=values, kind="inst_freq")


def spm_phase(phi_prime: SampledFunction) -> SampledFunction:
    """phi_des(l) = int_{l_min}^{l} phi_des', anchored at 0."""
    if phi_prime.kind != "inst_freq":
        raise ContractViolation(f"expected an instantaneous frequency, got kind '{phi_prime.kind}'")
    values = integrate.cumulative_trapezoid(phi_prime.values, phi_prime.l_grid, initial=0.0)
    return SampledFunction(l_grid=phi_prime.l_grid, values=values, kind="phase")


def _interpolate_phase(phi_des: SampledFunction, grid: ElementGrid) -> np.ndarray:
    if phi_des.kind != "phase":
        raise ContractViolation(f"expected a phase function, got kind '{phi_des.kind}'")
    step = phi_des.step
    if grid.l_sum.min() < phi_des.l_min - step or grid.l_sum.max() > phi_des.l_max + step:
        raise ContractViolation("element path sums fall outside the designed l grid; "
                                "l_min / l_max are inconsistent with the lattice")
    return np.interp(grid.l_sum, phi_des.l_grid, phi_des.values)


def map_phase_to_elements(phi_des: SampledFunction, grid: ElementGrid) -> PhaseProfile:
    """phi_des(x, y) = phi_des(l(x, y)) by linear interpolation, wrapped to [0, 2 pi)."""
    return PhaseProfile.wrapped(_interpolate_phase(phi_des, grid), kind="custom")


@dataclass(frozen=True)
class WidebandDesign:
    """Every intermediate product of one design run."""

    grid: ElementGrid
    bounds: PathSumBounds
    amplitude: SampledFunction
    inst_freq: SampledFunction
    phase: SampledFunction
    narrowband: PhaseProfile
    wideband: PhaseProfile


def amplitude_modulation(l_grid, cfg, bounds: PathSumBounds, n_jobs: int = 1) -> SampledFunction:
    """Boresight shortcut when gamma_c vanishes, arc integrals otherwise."""
    if cfg.is_boresight:
        return amplitude_modulation_boresight(l_grid, cfg)
    return amplitude_modulation_general(l_grid, cfg, bounds, n_jobs=n_jobs)


def run_design(cfg, grid: Optional[ElementGrid] = None, n_jobs: int = 1) -> WidebandDesign:
    """
    Full design pipeline: bounds -> A(l) -> phi_des' -> phi_des -> elements -> phi.

    Args:
        cfg: Scenario
        grid: Pre-built element grid (built from cfg when omitted)
        n_jobs: Workers for the A(l) quadrature
    """
    grid = build_element_grid(cfg) if grid is None else grid
    bounds = path_sum_bounds(grid)
    l_grid = l_samples(bounds, cfg.n_l_samples)

    amplitude = amplitude_modulation(l_grid, cfg, bounds, n_jobs=n_jobs)
    inst_freq = spm_instantaneous_frequency(amplitude, cfg, band_guard=cfg.band_guard)
    phase = spm_phase(inst_freq)

    cycles = cfg.f_c_hz * grid.l_sum / SPEED_OF_LIGHT
    standard = TWO_PI * np.mod(cycles, 1.0)
    narrowband = PhaseProfile.wrapped(standard, kind="narrowband")
    wideband = PhaseProfile.wrapped(standard + _interpolate_phase(phase, grid), kind="wideband")

    return WidebandDesign(grid=grid, bounds=bounds, amplitude=amplitude, inst_freq=inst_freq,
                          phase=phase, narrowband=narrowband, wideband=wideband)


def design_wideband_profile(cfg, grid: Optional[ElementGrid] = None, n_jobs: int = 1) -> PhaseProfile:
    """Wideband phase profile phi = (phi_std + phi_des) mod 2 pi."""
    return run_design(cfg, grid=grid, n_jobs=n_jobs).wideband
