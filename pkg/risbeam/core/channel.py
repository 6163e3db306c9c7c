"""
Near-field cascaded channel and exact discrete beampattern.

The beampattern here is the reference every designed phase profile is judged
against: it sums the full element lattice at each frequency, nothing is
approximated.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from risbeam.config.config import SPEED_OF_LIGHT, SUM_BLOCK_SIZE
from risbeam.core.geometry import ElementGrid, path_lengths
from risbeam.errors import ContractViolation

TWO_PI = 2.0 * math.pi
PROFILE_KINDS = ("narrowband", "wideband", "custom")
BEAMPATTERN_COLUMNS = ["freq_hz", "gain_db", "gain_re", "gain_im"]


@dataclass(frozen=True)
class PhaseProfile:
    """Per-element phase shifts (rad), index-aligned with an ElementGrid."""

    phases: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ContractViolation(f"unknown profile kind '{self.kind}'")
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 1:
            raise ContractViolation("phases must be a 1-D array")
        if phases.size and (phases.min() < 0.0 or phases.max() >= TWO_PI):
            raise ContractViolation("phases must lie in [0, 2*pi)")
        object.__setattr__(self, "phases", phases)

    @classmethod
    def wrapped(cls, raw, kind: str = "custom") -> "PhaseProfile":
        """Build a profile from unwrapped phases."""
        phases = np.mod(np.asarray(raw, dtype=float), TWO_PI)
        # mod can return exactly 2*pi for tiny negative inputs
        phases[phases >= TWO_PI] = 0.0
        return cls(phases=phases, kind=kind)

    def __len__(self):
        return int(self.phases.size)


@dataclass(frozen=True)
class Beampattern:
    """Complex end-to-end gain g(f) on an increasing frequency grid."""

    freqs: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        gains = np.asarray(self.gains, dtype=complex)
        if freqs.shape != gains.shape or freqs.ndim != 1:
            raise ContractViolation("freqs and gains must be 1-D arrays of equal length")
        if freqs.size > 1 and np.any(np.diff(freqs) <= 0):
            raise ContractViolation("beampattern frequencies must be strictly increasing")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "gains", gains)

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.gains) ** 2

    @property
    def gain_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.power)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "freq_hz": self.freqs,
            "gain_db": self.gain_db,
            "gain_re": self.gains.real,
            "gain_im": self.gains.imag,
        }, columns=BEAMPATTERN_COLUMNS)


def amplitude_coefficient(f) -> np.ndarray:
    """eta(f) = c^2 / (4 pi^2 f^2)."""
    f = np.asarray(f, dtype=float)
    return SPEED_OF_LIGHT ** 2 / (TWO_PI * f) ** 2


def cascaded_channel(x, y, f: float, cfg) -> np.ndarray:
    """
    TX -> element (x, y, 0) -> DT channel at frequency f.

    Works for any surface point, not only lattice elements.
    """
    l_tx, l_dt = path_lengths(x, y, cfg)
    phase = -TWO_PI * f * (l_tx + l_dt) / SPEED_OF_LIGHT
    return amplitude_coefficient(f) * np.exp(1j * phase) / (l_tx * l_dt)


def _blocked_sum(grid: ElementGrid, phases: np.ndarray, wavenumber: float) -> complex:
    """
    Sum exp(j(phi - k l)) / (l_TX l_DT) over the grid in fixed-size blocks.

    Each block is reduced by numpy's pairwise sum and the block partials are
    combined with fsum, so the result does not depend on how frequencies are
    scheduled across workers.
    """
    partials = []
    for start in range(0, grid.count, SUM_BLOCK_SIZE):
        stop = start + SUM_BLOCK_SIZE
        arg = phases[start:stop] - wavenumber * grid.l_sum[start:stop]
        weight = 1.0 / (grid.l_tx_len[start:stop] * grid.l_dt_len[start:stop])
        partials.append(np.sum(weight * np.exp(1j * arg)))
    partials = np.asarray(partials, dtype=complex)
    return complex(math.fsum(partials.real), math.fsum(partials.imag))


def siso_gain(grid: ElementGrid, profile: PhaseProfile, f: float) -> complex:
    """
    g(f) = sum_e exp(j phi_e) h(x_e, y_e, f).

    Raises:
        ContractViolation: profile length differs from the grid size
    """
    if len(profile) != grid.count:
        raise ContractViolation(f"profile has {len(profile)} phases but the grid has {grid.count} elements")
    if not f > 0:
        raise ContractViolation(f"frequency must be positive, got {f}")

    wavenumber = TWO_PI * f / SPEED_OF_LIGHT
    total = _blocked_sum(grid, profile.phases, wavenumber)
    return complex(amplitude_coefficient(f) * total)


def beampattern(grid: ElementGrid, profile: PhaseProfile, freqs, n_jobs: int = 1) -> Beampattern:
    """
    Evaluate siso_gain at every frequency.

    Args:
        grid: Element grid
        profile: Phase profile aligned with the grid
        freqs: Non-empty increasing frequency grid (Hz)
        n_jobs: Worker threads for the frequency map (results are identical for any value)
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if freqs.size == 0:
        raise ContractViolation("frequency grid is empty")
    if freqs.size > 1 and np.any(np.diff(freqs) <= 0):
        raise ContractViolation("frequency grid must be strictly increasing")
    if len(profile) != grid.count:
        raise ContractViolation(f"profile has {len(profile)} phases but the grid has {grid.count} elements")

    if n_jobs == 1 or freqs.size == 1:
        gains = [siso_gain(grid, profile, f) for f in freqs]
    else:
        gains = Parallel(n_jobs=n_jobs, backend="threading")(
            delayed(siso_gain)(grid, profile, f) for f in freqs
        )
    return Beampattern(freqs=freqs, gains=np.asarray(gains, dtype=complex))


def frequency_grid(cfg, n: Optional[int] = None) -> np.ndarray:
    """n equally spaced frequencies over [f_c - B/2, f_c + B/2], ends included."""
    n = cfg.n_freq_samples if n is None else n
    half = cfg.bandwidth_hz / 2.0
    if n == 1:
        return np.array([cfg.f_c_hz])
    return np.linspace(cfg.f_c_hz - half, cfg.f_c_hz + half, n)


def subcarrier_frequencies(cfg) -> np.ndarray:
    """Centre frequencies of the n_sub equal sub-bands covering the band."""
    delta = cfg.bandwidth_hz / cfg.n_sub
    k = np.arange(cfg.n_sub, dtype=float)
    return cfg.f_c_hz - cfg.bandwidth_hz / 2.0 + (k + 0.5) * delta
