"""Exception hierarchy shared by the config, core and CLI layers."""


class RisBeamError(Exception):
    """Base class for every error raised by risbeam."""


class ConfigError(RisBeamError):
    """Scenario file is missing, malformed or physically inconsistent."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DomainError(RisBeamError):
    """A geometric quantity was requested outside its domain of definition."""


class ContractViolation(RisBeamError):
    """Caller broke a precondition (misaligned arrays, grids that do not overlap, ...)."""


class UndefinedPeakError(RisBeamError):
    """Ambiguity normalisation impossible: the spectrum carries no energy."""


class InconclusiveCheck(RisBeamError):
    """An oracle check could not gather enough samples to decide."""


class ChirpValidityWarning(UserWarning):
    """LFM pulse too short for its spectrum to be approximately flat."""
