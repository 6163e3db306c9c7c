"""
Downstream metrics of a beampattern: multicarrier spectral efficiency under the
thermal noise model, and LFM zero-Doppler ambiguity / distance resolution.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel
from scipy import fft

from risbeam.config.config import (
    AMBIGUITY_ZERO_PAD,
    BOLTZMANN,
    HALF_POWER_LEVEL,
    LFM_OVERSAMPLING,
    PLANCK,
    SENSING_N_FREQ,
    SENSING_SPAN_FACTOR,
)
from risbeam.core.channel import (
    Beampattern,
    PhaseProfile,
    beampattern,
    frequency_grid,
    subcarrier_frequencies,
)
from risbeam.core.geometry import ElementGrid, build_element_grid
from risbeam.core.spm_design import run_design
from risbeam.errors import ChirpValidityWarning, ConfigError, ContractViolation, UndefinedPeakError

RATE_SWEEP_COLUMNS = ["l_dt_m", "gamma_c_deg", "rate_nb", "rate_wb", "increment_pct"]
SWEEP_PARAMETERS = ("radius_m", "bandwidth_hz", "band_guard")
MIN_TIME_BANDWIDTH = 10.0
AMBIGUITY_CURVE_SPAN = 20.0  # exported delay window, in units of 1/B


class RateReport(BaseModel):
    """Narrowband vs wideband spectral efficiency (bit/s/Hz)."""

    rate_wideband: float
    rate_narrowband: float
    increment_pct: Optional[float]
    subcarrier_hz: List[float]
    snr_wideband: List[float]
    snr_narrowband: List[float]

    @classmethod
    def from_snr(cls, freqs, snr_narrowband, snr_wideband) -> "RateReport":
        rate_nb = float(np.mean(np.log2(1.0 + snr_narrowband)))
        rate_wb = float(np.mean(np.log2(1.0 + snr_wideband)))
        increment = 100.0 * (rate_wb / rate_nb - 1.0) if rate_nb > 0 else None
        return cls(rate_wideband=rate_wb, rate_narrowband=rate_nb, increment_pct=increment,
                   subcarrier_hz=list(map(float, freqs)),
                   snr_wideband=list(map(float, snr_wideband)),
                   snr_narrowband=list(map(float, snr_narrowband)))

    def summary(self) -> Dict[str, Optional[float]]:
        return {"rate_nb": self.rate_narrowband, "rate_wb": self.rate_wideband,
                "increment_pct": self.increment_pct}


class AmbiguityReport(BaseModel):
    """Zero-Doppler ambiguity |chi(tau)| normalised to 1 at tau = 0."""

    delay_axis: List[float]
    magnitude: List[float]
    mainlobe_width_3db: float
    resolution_ratio: Optional[float] = None

    def summary(self) -> Dict[str, Optional[float]]:
        return {"mainlobe_width_3db_s": self.mainlobe_width_3db,
                "resolution_ratio": self.resolution_ratio}


def noise_psd(f, temperature_k: float):
    """Thermal noise n(f) = hf / (exp(hf / kT) - 1) in W/Hz."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0) or not temperature_k > 0:
        raise ContractViolation("noise_psd needs f > 0 and T > 0")
    x = PLANCK * f / (BOLTZMANN * temperature_k)
    return PLANCK * f / np.expm1(x)


def subcarrier_snr(bp: Beampattern, cfg, tx_power_w: Optional[float] = None) -> np.ndarray:
    """
    Per-subcarrier SNR eta |g(f_k)|^2 / (n(f_k) Delta_sub).

    Raises:
        ContractViolation: bp is not sampled on the subcarrier centre frequencies
    """
    expected = subcarrier_frequencies(cfg)
    if bp.freqs.shape != expected.shape or not np.allclose(bp.freqs, expected, rtol=1e-12, atol=0.0):
        raise ContractViolation(f"beampattern has {bp.freqs.size} samples; "
                                f"expected the {cfg.n_sub} subcarrier centre frequencies")
    eta = cfg.tx_power_w if tx_power_w is None else tx_power_w
    delta_sub = cfg.bandwidth_hz / cfg.n_sub
    return eta * bp.power / (noise_psd(bp.freqs, cfg.temperature_k) * delta_sub)


def spectral_efficiency(bp: Beampattern, cfg, tx_power_w: Optional[float] = None) -> float:
    """Mean of log2(1 + SNR_k) over the N_sub subcarriers (bit/s/Hz)."""
    return float(np.mean(np.log2(1.0 + subcarrier_snr(bp, cfg, tx_power_w))))


def rate_report(grid: ElementGrid, narrowband: PhaseProfile, wideband: PhaseProfile, n_jobs: int = 1) -> RateReport:
    cfg = grid.scenario
    freqs = subcarrier_frequencies(cfg)
    snr_nb = subcarrier_snr(beampattern(grid, narrowband, freqs, n_jobs=n_jobs), cfg)
    snr_wb = subcarrier_snr(beampattern(grid, wideband, freqs, n_jobs=n_jobs), cfg)
    return RateReport.from_snr(freqs, snr_nb, snr_wb)


def _rate_row(cfg, l_dt: float, gamma_c_deg: float) -> Dict[str, float]:
    scenario = cfg.replace(l_dt_m=float(l_dt), gamma_c_deg=float(gamma_c_deg), gamma_deg=None)
    design = run_design(scenario)
    report = rate_report(design.grid, design.narrowband, design.wideband)
    return {"l_dt_m": float(l_dt), "gamma_c_deg": float(gamma_c_deg),
            "rate_nb": report.rate_narrowband, "rate_wb": report.rate_wideband,
            "increment_pct": report.increment_pct}


def rate_sweep(cfg, l_dt_values: Sequence[float], gamma_c_deg_values: Sequence[float], n_jobs: int = 1) -> pd.DataFrame:
    """Narrowband and wideband rates over an (l_dt, gamma_c) grid, one row per pair."""
    pairs = [(l_dt, g) for l_dt in l_dt_values for g in gamma_c_deg_values]
    rows = Parallel(n_jobs=n_jobs, backend="threading")(delayed(_rate_row)(cfg, l_dt, g) for l_dt, g in pairs)
    return pd.DataFrame(rows, columns=RATE_SWEEP_COLUMNS)


def _crossing_width(axis: np.ndarray, values: np.ndarray, level: float, centre: int) -> float:
    """
    Width of the contiguous region around `centre` where values >= level,
    with both crossings located by linear interpolation.
    """
    n = values.size

    right = centre
    while right + 1 < n and values[right + 1] >= level:
        right += 1
    left = centre
    while left - 1 >= 0 and values[left - 1] >= level:
        left -= 1

    if right + 1 < n:
        v0, v1 = values[right], values[right + 1]
        hi = axis[right] + (v0 - level) / (v0 - v1) * (axis[right + 1] - axis[right])
    else:
        hi = axis[right]
    if left - 1 >= 0:
        v0, v1 = values[left], values[left - 1]
        lo = axis[left] - (v0 - level) / (v0 - v1) * (axis[left] - axis[left - 1])
    else:
        lo = axis[left]
    return float(hi - lo)


def gain_spread_db(bp: Beampattern, f_lo: float, f_hi: float) -> float:
    """max - min of the gain in dB over [f_lo, f_hi]."""
    mask = (bp.freqs >= f_lo) & (bp.freqs <= f_hi)
    if not np.any(mask):
        raise ContractViolation(f"no beampattern samples inside [{f_lo}, {f_hi}] Hz")
    gain = bp.gain_db[mask]
    return float(gain.max() - gain.min())


def effective_bandwidth(bp: Beampattern, drop_db: float = 3.0) -> float:
    """Width (Hz) of the contiguous band around the peak within drop_db of the peak gain."""
    gain = bp.gain_db
    peak = int(np.argmax(gain))
    if not np.isfinite(gain[peak]):
        raise UndefinedPeakError("beampattern is identically zero")
    return _crossing_width(bp.freqs, gain, gain[peak] - drop_db, peak)


def _flatness_row(cfg, parameter: str, value: float) -> Dict[str, float]:
    scenario = cfg.replace(**{parameter: float(value)})
    design = run_design(scenario)
    freqs = frequency_grid(scenario)
    f_lo, f_hi = freqs[0], freqs[-1]
    nb = beampattern(design.grid, design.narrowband, freqs)
    wb = beampattern(design.grid, design.wideband, freqs)
    return {
        parameter: float(value),
        "spread_nb_db": gain_spread_db(nb, f_lo, f_hi),
        "spread_wb_db": gain_spread_db(wb, f_lo, f_hi),
        "bandwidth_nb_hz": effective_bandwidth(nb),
        "bandwidth_wb_hz": effective_bandwidth(wb),
        "mean_gain_nb_db": float(np.mean(nb.gain_db)),
        "mean_gain_wb_db": float(np.mean(wb.gain_db)),
    }


def flatness_sweep(cfg, parameter: str, values: Sequence[float], n_jobs: int = 1) -> pd.DataFrame:
    """
    In-band spread and effective bandwidth of both profiles while one scenario key varies.

    Args:
        cfg: Base scenario
        parameter: one of SWEEP_PARAMETERS
        values: Values taken by the parameter
        n_jobs: Scenarios evaluated concurrently

    Raises:
        ConfigError: unsupported parameter
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"Cannot sweep '{parameter}'. Valid parameters: {', '.join(SWEEP_PARAMETERS)}",
                          key=parameter)
    rows = Parallel(n_jobs=n_jobs, backend="threading")(
        delayed(_flatness_row)(cfg, parameter, v) for v in values
    )
    columns = [parameter, "spread_nb_db", "spread_wb_db", "bandwidth_nb_hz", "bandwidth_wb_hz",
               "mean_gain_nb_db", "mean_gain_wb_db"]
    return pd.DataFrame(rows, columns=columns)


@dataclass(frozen=True)
class Spectrum:
    """Complex baseband spectrum on a uniform, increasing frequency grid (Hz offset from f_c)."""

    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if freqs.ndim != 1 or freqs.shape != values.shape or freqs.size < 2:
            raise ContractViolation("spectrum needs matching 1-D freqs/values with at least 2 samples")
        steps = np.diff(freqs)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
            raise ContractViolation("spectrum frequency grid must be uniform and increasing")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    @property
    def step(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.step)

    def width_db(self, drop_db: float = 3.0) -> float:
        """Width of the contiguous region around the spectral peak within drop_db of it."""
        power = np.abs(self.values) ** 2
        peak = int(np.argmax(power))
        if power[peak] == 0:
            raise UndefinedPeakError("spectrum carries no energy")
        return _crossing_width(self.freqs, power / power[peak], 10.0 ** (-drop_db / 10.0), peak)


def lfm_baseband_spectrum(bandwidth_hz: float, duration_s: float,
                          oversampling: int = LFM_OVERSAMPLING) -> Spectrum:
    """
    Spectrum of the chirp exp(j pi (B / T_p) t^2) on t in [-T_p/2, T_p/2].

    The pulse is sampled at `oversampling` times B and transformed with an FFT;
    values are scaled by 1/fs so they approximate the continuous transform.
    A time-bandwidth product below 10 emits a ChirpValidityWarning.
    """
    if not bandwidth_hz > 0 or not duration_s > 0:
        raise ContractViolation("LFM bandwidth and duration must be positive")
    tbp = bandwidth_hz * duration_s
    if tbp < MIN_TIME_BANDWIDTH:
        warnings.warn(f"LFM time-bandwidth product {tbp:.3g} < {MIN_TIME_BANDWIDTH:g}; "
                      "the chirp spectrum is far from flat", ChirpValidityWarning, stacklevel=2)

    fs = oversampling * bandwidth_hz
    n = max(int(round(duration_s * fs)), 2)
    t = (np.arange(n) - (n - 1) / 2.0) / fs
    pulse = np.exp(1j * math.pi * (bandwidth_hz / duration_s) * t ** 2)
    values = fft.fftshift(fft.fft(fft.ifftshift(pulse))) / fs
    freqs = fft.fftshift(fft.fftfreq(n, d=1.0 / fs))
    return Spectrum(freqs=freqs, values=values)


def normalize_beampattern(bp: Beampattern, f_c_hz: float, bandwidth_hz: float) -> Beampattern:
    """g(f) divided by its largest magnitude inside [f_c - B/2, f_c + B/2]."""
    half = bandwidth_hz / 2.0
    mask = np.abs(bp.freqs - f_c_hz) <= half * (1.0 + 1e-12)
    if not np.any(mask):
        raise ContractViolation("beampattern has no samples inside the band")
    peak = np.abs(bp.gains[mask]).max()
    if peak == 0:
        raise UndefinedPeakError("beampattern is identically zero in band")
    return Beampattern(freqs=bp.freqs, gains=bp.gains / peak)


def apply_beamforming_filter(spectrum: Spectrum, bp: Beampattern, f_c_hz: float = 0.0) -> Spectrum:
    """
    S(f) g(f), with g linearly interpolated onto the spectrum grid.

    The beampattern is shifted by -f_c onto the baseband axis; outside its
    frequency range g is taken as 0.

    Raises:
        ContractViolation: the two frequency ranges do not overlap
    """
    bp_freqs = bp.freqs - f_c_hz
    if bp_freqs[-1] < spectrum.freqs[0] or bp_freqs[0] > spectrum.freqs[-1]:
        raise ContractViolation("beampattern and spectrum frequency grids are disjoint")

    if bp_freqs.size == 1:
        gain = np.where(np.isclose(spectrum.freqs, bp_freqs[0]), bp.gains[0], 0.0)
    else:
        real = np.interp(spectrum.freqs, bp_freqs, bp.gains.real, left=0.0, right=0.0)
        imag = np.interp(spectrum.freqs, bp_freqs, bp.gains.imag, left=0.0, right=0.0)
        gain = real + 1j * imag
    return Spectrum(freqs=spectrum.freqs, values=spectrum.values * gain)


def ambiguity_zero_doppler(spectrum: Spectrum, zero_pad: int = AMBIGUITY_ZERO_PAD) -> AmbiguityReport:
    """
    |chi(tau)| as the inverse transform of |S(f)|^2, normalised to its peak.

    The energy spectrum is zero-padded `zero_pad` times before the inverse FFT
    so the delay axis is fine enough for the half-power width.

    Raises:
        UndefinedPeakError: the spectrum is identically zero
    """
    energy = np.abs(spectrum.values) ** 2
    if not np.any(energy > 0):
        raise UndefinedPeakError("cannot normalise the ambiguity of an all-zero spectrum")

    n = energy.size
    total = n * zero_pad
    padded = np.zeros(total)
    start = (total - n) // 2
    padded[start:start + n] = energy

    chi = np.abs(fft.fftshift(fft.ifft(fft.ifftshift(padded))))
    chi /= chi.max()
    delays = fft.fftshift(fft.fftfreq(total, d=spectrum.step))
    centre = int(np.argmin(np.abs(delays)))

    width = _crossing_width(delays, chi, HALF_POWER_LEVEL, centre)
    if not width > 0:
        raise UndefinedPeakError("ambiguity mainlobe has no half-power crossing")
    return AmbiguityReport(delay_axis=delays.tolist(), magnitude=chi.tolist(), mainlobe_width_3db=width)


def _db(values: np.ndarray, reference: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(values) / reference)


def sensing_comparison(cfg, grid: Optional[ElementGrid] = None,
                       profiles: Sequence[PhaseProfile] = (), n_jobs: int = 1
                       ) -> Tuple[pd.DataFrame, pd.DataFrame, Dict[str, AmbiguityReport]]:
    """
    LFM pulse through each profile's normalised beampattern.

    Returns:
        (spectra, curves, reports): spectra in dB relative to the LFM peak,
        ambiguity curves on a window of +/- 20/B, and one AmbiguityReport per
        profile kind plus "lfm". The wideband report carries resolution_ratio
        when a narrowband profile is also given.
    """
    grid = build_element_grid(cfg) if grid is None else grid
    if not profiles:
        raise ContractViolation("sensing comparison needs at least one phase profile")

    lfm = lfm_baseband_spectrum(cfg.bandwidth_hz, cfg.lfm_duration_s)
    span = SENSING_SPAN_FACTOR * cfg.bandwidth_hz
    freqs = np.linspace(cfg.f_c_hz - span, cfg.f_c_hz + span, SENSING_N_FREQ)

    reference = np.abs(lfm.values).max()
    spectra = {"freq_offset_hz": lfm.freqs, "lfm_db": _db(lfm.values, reference)}
    reports = {"lfm": ambiguity_zero_doppler(lfm)}
    for profile in profiles:
        bp = normalize_beampattern(beampattern(grid, profile, freqs, n_jobs=n_jobs), cfg.f_c_hz, cfg.bandwidth_hz)
        received = apply_beamforming_filter(lfm, bp, cfg.f_c_hz)
        spectra[f"{profile.kind}_db"] = _db(received.values, reference)
        reports[profile.kind] = ambiguity_zero_doppler(received)

    if "narrowband" in reports and "wideband" in reports:
        ratio = reports["narrowband"].mainlobe_width_3db / reports["wideband"].mainlobe_width_3db
        reports["wideband"] = reports["wideband"].model_copy(update={"resolution_ratio": ratio})

    delays = np.asarray(reports["lfm"].delay_axis)
    window = np.abs(delays) <= AMBIGUITY_CURVE_SPAN / cfg.bandwidth_hz
    curves = {"delay_s": delays[window]}
    for name, report in reports.items():
        curves[name] = np.asarray(report.magnitude)[window]

    return pd.DataFrame(spectra), pd.DataFrame(curves), reports
