import math

# Physical constants
SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
PLANCK = 6.625e-34  # J*s, value used by the thermal noise model
BOLTZMANN = 1.3806e-23  # J/K

# Scenario defaults (keys mirror the YAML file)
DEFAULTS = {
    "n_l_samples": 4096,
    "n_freq_samples": 200,
    "tx_power_w": 5e-3,
    "n_sub": 200,
    "temperature_k": 290.0,
    "lfm_duration_s": 1e-6,
    "band_guard": 0.35,
}
DEFAULTS_VERSION = "2024.2"

# Named profiles override the aperture only
PROFILES = {
    "paper": {"radius_m": 1.0},
    "desk": {"radius_m": 0.25},
}

# Numerical settings
BORESIGHT_TOLERANCE_RAD = 1e-9
JACOBIAN_STEP_FRACTION = 1e-6  # h_l relative to l_max - l_min
ENDPOINT_INSET_FRACTION = 1e-4  # A(l) endpoints are evaluated this far inside the interval
QUAD_EPSREL = 1e-6
ROOT_XTOL = 1e-14
SUM_BLOCK_SIZE = 65_536

# LFM / ambiguity settings
LFM_OVERSAMPLING = 4
AMBIGUITY_ZERO_PAD = 8
HALF_POWER_LEVEL = 1.0 / math.sqrt(2.0)
SENSING_SPAN_FACTOR = 0.75  # beampattern evaluated over f_c +/- 0.75 B for filtering
SENSING_N_FREQ = 601

# Oracle acceptance thresholds (overridable per run)
ORACLE_THRESHOLDS = {
    "ellipse_residuals": 1e-9,
    "amplitude_histogram": 0.02,
    "spm_prediction": 0.2,
    "riemann_consistency": 0.02,
    "reduction_consistency": 0.005,
}
