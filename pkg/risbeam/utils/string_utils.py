import re

from risbeam.errors import ConfigError

_SWEEP_PATTERN = re.compile(r'^\s*([a-z_]+)\s*=\s*(.+)$')


def format_string(text, limit=55):
    """Collapse a multi-line value onto one line and cut it at `limit` characters."""
    formatted = '; '.join(str(text).strip().split('\n'))
    if len(formatted) > limit:
        return formatted[:max(limit - 3, 0)] + '...'
    return formatted


def parse_float_list(text, key=None):
    """
    Parse "1,2.5,5" into [1.0, 2.5, 5.0].

    Raises:
        ConfigError: empty list or a value that is not a number
    """
    items = [s.strip() for s in str(text).split(',') if s.strip()]
    if not items:
        raise ConfigError(f"Expected a comma-separated list of numbers, got '{text}'", key=key)
    try:
        return [float(s) for s in items]
    except ValueError as e:
        raise ConfigError(f"Invalid number in '{text}': {e}", key=key) from e


def parse_sweep_spec(text):
    """
    Parse "radius_m=1,1.5,2" into ("radius_m", [1.0, 1.5, 2.0]).

    Raises:
        ConfigError: text is not of the form key=v1,v2,...
    """
    match = _SWEEP_PATTERN.match(str(text))
    if not match:
        raise ConfigError(f"Sweep must look like key=v1,v2,..., got '{text}'")
    key = match.group(1)
    return key, parse_float_list(match.group(2), key=key)
