"""
Scenario configuration - loads a YAML scenario file and validates it.
Every key carries its unit in the name (f_c_hz, radius_m, gamma_deg, ...).
"""

import math
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, ConfigDict, PrivateAttr, ValidationError, model_validator

from risbeam.config.config import BORESIGHT_TOLERANCE_RAD, DEFAULTS, PROFILES, SPEED_OF_LIGHT
from risbeam.core.geometry import gamma_c_from_gamma, gamma_from_gamma_c
from risbeam.errors import ConfigError

REQUIRED_KEYS = ["f_c_hz", "bandwidth_hz", "radius_m", "l_tx_m", "l_dt_m"]


class ScenarioConfig(BaseModel):
    """All physical parameters of one experiment."""

    model_config = ConfigDict(extra="forbid")

    f_c_hz: float
    bandwidth_hz: float
    radius_m: float
    element_spacing_m: Optional[float] = None
    l_tx_m: float
    l_dt_m: float
    gamma_deg: Optional[float] = None
    gamma_c_deg: Optional[float] = None
    n_l_samples: int = DEFAULTS["n_l_samples"]
    n_freq_samples: int = DEFAULTS["n_freq_samples"]
    tx_power_w: float = DEFAULTS["tx_power_w"]
    n_sub: int = DEFAULTS["n_sub"]
    temperature_k: float = DEFAULTS["temperature_k"]
    lfm_duration_s: float = DEFAULTS["lfm_duration_s"]
    band_guard: float = DEFAULTS["band_guard"]

    _gamma_rad: float = PrivateAttr(default=0.0)
    _gamma_c_rad: float = PrivateAttr(default=0.0)

    @model_validator(mode="after")
    def _check_physics(self):
        positive = ["f_c_hz", "bandwidth_hz", "radius_m", "l_tx_m", "l_dt_m",
                    "tx_power_w", "temperature_k", "lfm_duration_s"]
        for key in positive:
            if not getattr(self, key) > 0:
                raise ValueError(f"{key} must be positive")
        if self.element_spacing_m is not None and not self.element_spacing_m > 0:
            raise ValueError("element_spacing_m must be positive")
        if self.bandwidth_hz >= 2 * self.f_c_hz:
            raise ValueError("bandwidth_hz must stay below 2*f_c_hz so the band is positive-frequency")
        for key in ["n_l_samples", "n_freq_samples", "n_sub"]:
            if getattr(self, key) < 1:
                raise ValueError(f"{key} must be at least 1")
        if self.n_l_samples < 2:
            raise ValueError("n_l_samples must be at least 2")
        if not 0.0 <= self.band_guard <= 1.0:
            raise ValueError("band_guard must lie in [0, 1]")

        if (self.gamma_deg is None) == (self.gamma_c_deg is None):
            raise ValueError("exactly one of gamma_deg / gamma_c_deg must be given")

        if self.gamma_deg is not None:
            if not -90.0 < self.gamma_deg < 90.0:
                raise ValueError("gamma_deg must lie in (-90, 90)")
            self._gamma_rad = math.radians(self.gamma_deg)
            self._gamma_c_rad = gamma_c_from_gamma(self._gamma_rad, self.l_tx_m, self.l_dt_m)
        else:
            self._gamma_c_rad = math.radians(self.gamma_c_deg)
            self._gamma_rad = gamma_from_gamma_c(self._gamma_c_rad, self.l_tx_m, self.l_dt_m)

        if math.isclose(self._gamma_rad, 0.0, abs_tol=1e-15) and math.isclose(self.l_tx_m, self.l_dt_m):
            raise ValueError("TX and DT coincide; the path-sum foci must be distinct")
        return self

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.f_c_hz

    @property
    def spacing_m(self) -> float:
        """Element pitch, defaulting to half a carrier wavelength."""
        if self.element_spacing_m is not None:
            return self.element_spacing_m
        return self.wavelength_m / 2.0

    @property
    def design_bandwidth_hz(self) -> float:
        """Band the phase design spreads over: B widened by band_guard."""
        return self.bandwidth_hz * (1.0 + self.band_guard)

    @property
    def gamma_rad(self) -> float:
        """DT polar angle, measured from the boresight axis toward +y."""
        return self._gamma_rad

    @property
    def gamma_c_rad(self) -> float:
        """Tilt of the TX -> DT focal axis away from the z-axis."""
        return self._gamma_c_rad

    @property
    def is_boresight(self) -> bool:
        """
        The DT sits on the z-axis, so every section is a circle about the origin.

        gamma_c = pi (DT on the axis below the TX) counts as well; the frame
        keeps pi so that the TX stays at tau = -1.
        """
        return abs(math.sin(self._gamma_c_rad)) < BORESIGHT_TOLERANCE_RAD

    def snapshot(self) -> Dict[str, Any]:
        """Plain mapping that validates back into an identical scenario."""
        return self.model_dump(exclude_none=True)

    def replace(self, **changes) -> "ScenarioConfig":
        """Return a re-validated copy with some keys changed (None removes a key)."""
        data = self.snapshot()
        data.update(changes)
        data = {k: v for k, v in data.items() if v is not None}
        return scenario_from_mapping(data)


def scenario_from_mapping(data: Dict[str, Any]) -> ScenarioConfig:
    """
    Validate a raw mapping into a ScenarioConfig.

    Raises:
        ConfigError: naming the first offending key
    """
    if not isinstance(data, dict):
        raise ConfigError("Scenario file must contain a mapping of keys to values")

    for key in REQUIRED_KEYS:
        if key not in data:
            raise ConfigError(f"Missing required key: {key}", key=key)

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = str(first["loc"][0]) if first.get("loc") else None
        message = first.get("msg", str(e))
        if key:
            raise ConfigError(f"Invalid value for {key}: {message}", key=key) from e
        raise ConfigError(f"Invalid scenario: {message}") from e


class ConfigManager:
    """Loads a scenario file, applies a named profile and validates the result."""

    TEMPLATE_FILE_NAME = "scenario-example.yaml"

    def __init__(self, config_file, profile: Optional[str] = None):
        """
        Args:
            config_file: Path to the YAML scenario file
            profile: Optional profile name ("paper" or "desk") overriding the aperture
        """
        self.config_file = Path(config_file)
        self.profile = profile
        self._scenario = None

    @staticmethod
    def template_path() -> Path:
        """Path to the bundled example scenario."""
        return Path(__file__).parent / ConfigManager.TEMPLATE_FILE_NAME

    def load_config(self) -> Dict[str, Any]:
        """
        Load the raw scenario mapping from YAML.

        Raises:
            ConfigError: if the file is missing or is not valid YAML
        """
        if not self.config_file.exists():
            raise ConfigError(f"Config file not found: {self.config_file}")

        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"YAML syntax error in {self.config_file}: {e}") from e

        return config if config is not None else {}

    def _apply_profile(self, config: Dict[str, Any]) -> Dict[str, Any]:
        if self.profile is None:
            return config
        if self.profile not in PROFILES:
            raise ConfigError(f"Unknown profile '{self.profile}'. Valid profiles: {', '.join(PROFILES)}")
        merged = dict(config)
        merged.update(PROFILES[self.profile])
        return merged

    @property
    def scenario(self) -> ScenarioConfig:
        """Validated scenario (cached after the first load)."""
        if self._scenario is None:
            self._scenario = scenario_from_mapping(self._apply_profile(self.load_config()))
        return self._scenario

    @staticmethod
    def write_scenario(scenario: ScenarioConfig, path) -> Path:
        """Write a scenario back to YAML so that reloading it reproduces the run."""
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(scenario.snapshot(), f, sort_keys=False)
        return path
