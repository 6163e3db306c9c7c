"""
RisBeam - wideband beamforming for circular reflecting surfaces.

Designs per-element phase profiles for a circular reconfigurable intelligent
surface so that the beampattern toward a target stays large and flat over a
wide band, and checks the design by exact discrete summation.
"""

__version__ = "0.1.0"
__author__ = "Jason Liao"
__license__ = "MIT"

__all__ = ["__version__"]
