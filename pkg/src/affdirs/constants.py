"""Dimension-dependent constants.

Everything here is elementary: sphere/ball volumes and the handful of
explicit constants used by the reduction-based counting bounds.  Two
different normalisations both naturally called "c_d" show up in this
subject; they are kept apart as ``cd_norm`` (the unit-density rescaling
of directional statistics) and ``cd_siegel`` (the Siegel-set constant
entering the counting bounds).
"""

from dataclasses import dataclass
from math import gamma, pi, sqrt

from .errors import ConfigError


def sphere_area(d):
    """Surface measure of the unit (d-1)-sphere in R^d, e.g. 2*pi for d=2."""
    if d < 1:
        raise ConfigError(f"sphere_area needs d >= 1, got {d}")
    return 2.0 * pi ** (d / 2.0) / gamma(d / 2.0)


def ball_volume(k):
    """Volume of the unit ball in R^k (k = 0 gives 1)."""
    if k < 0:
        raise ConfigError(f"ball_volume needs k >= 0, got {k}")
    return pi ** (k / 2.0) / gamma(k / 2.0 + 1.0)


@dataclass(frozen=True)
class Constants:
    """The explicit constants for a fixed ambient dimension d.

    cd_norm
        ``sphere_area(d) ** (-1/(d-1))``; rescales geodesic distances so
        that N directions on the sphere have unit mean density.
    cd_siegel
        ``d * (2/sqrt(3))**d``; controls how far reduced coordinates can
        drift inside a Siegel set.
    delta_d
        ``d * 4**d``; floor for the region radius in the counting bounds.
    C_d
        ``2 * (cd_siegel + 1)``; leading factor of the counting envelope.
    """

    d: int
    cd_norm: float
    cd_siegel: float
    delta_d: float
    C_d: float


def dimension_constants(d):
    if d < 2:
        raise ConfigError(f"dimension must be at least 2, got {d}")
    cd_siegel = d * (2.0 / sqrt(3.0)) ** d
    return Constants(
        d=d,
        cd_norm=sphere_area(d) ** (-1.0 / (d - 1)),
        cd_siegel=cd_siegel,
        delta_d=d * 4.0 ** d,
        C_d=2.0 * (cd_siegel + 1.0),
    )
