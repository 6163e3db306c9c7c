"""Numerical core: geometry, channel, phase design, metrics and oracle checks."""
