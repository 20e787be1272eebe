"""Directional statistics on the unit sphere.

Directions come from lattice shell points; distances are geodesic angles
computed as ``atan2(||rejection||, dot)``, which stays accurate down to
angles of order 1e-8 where ``arccos`` has already lost everything.  The
neighbour searches run through a k-d tree on the unit vectors with a
chord-length prefilter, followed by exact angle comparisons, so the
indexed paths count precisely the same pairs as the quadratic scans.
"""

from dataclasses import dataclass
from functools import cached_property
from math import pi, sin, sqrt

import numpy as np
import scipy.optimize
import scipy.special
from scipy.spatial import cKDTree

from .constants import ball_volume, dimension_constants, sphere_area
from .errors import ConfigError


def geodesic_distances(points, center):
    """Angles between unit row vectors and a unit center vector."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    center = np.asarray(center, dtype=float)
    dots = points @ center
    rej = points - dots[:, np.newaxis] * center
    return np.arctan2(np.linalg.norm(rej, axis=1), dots)


def geodesic_distance(u, v):
    return float(geodesic_distances(np.asarray(u)[np.newaxis, :], v)[0])


def _pair_angles(vectors, ii, jj):
    # single code path shared by the indexed and quadratic pair counts
    u = vectors[ii]
    v = vectors[jj]
    dots = np.einsum("ij,ij->i", u, v)
    rej = u - dots[:, np.newaxis] * v
    return np.arctan2(np.linalg.norm(rej, axis=1), dots)


def _chord_query_radius(theta):
    # chord length of the cutoff angle, inflated so boundary pairs survive
    # the prefilter; the exact angle comparison decides membership
    theta = min(theta, pi)
    return 2.0 * sin(theta / 2.0) * (1.0 + 1e-9) + 1e-12


class DirectionSet:
    """Unit direction vectors (input order preserved) with a lazy k-d tree."""

    def __init__(self, vectors, source_norms=None):
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        norms = np.linalg.norm(vectors, axis=1)
        if vectors.shape[0] and np.max(np.abs(norms - 1.0)) > 1e-6:
            raise ConfigError("DirectionSet expects unit vectors")
        self.vectors = vectors
        self.source_norms = None if source_norms is None else np.asarray(source_norms)

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1]

    @cached_property
    def tree(self):
        return cKDTree(self.vectors)


def directions_of(points, norms=None):
    """Normalise points to directions, preserving order and multiplicity.

    Accepts a ShellPoints-like object or a raw array.  Zero vectors are a
    hard error; shells touching the origin should be filtered first
    (``ShellPoints.without_origin``).
    """
    if hasattr(points, "points") and hasattr(points, "norms"):
        norms = points.norms
        points = points.points
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if norms is None:
        norms = np.linalg.norm(points, axis=1)
    else:
        norms = np.asarray(norms, dtype=float)
    if np.any(norms == 0.0):
        raise ConfigError("zero vector has no direction; drop the origin first")
    return DirectionSet(points / norms[:, np.newaxis], source_norms=norms)


def _sin_power_integral(theta, p):
    """Integral of sin(phi)**p from 0 to theta, for p >= 0, theta in [0, pi]."""
    if p == 0:
        return theta
    a = (p + 1) / 2.0
    total = sqrt(pi) * scipy.special.gamma(a) / scipy.special.gamma(p / 2.0 + 1.0)
    if theta <= pi / 2.0:
        x = sin(theta) ** 2
        return 0.5 * scipy.special.beta(a, 0.5) * scipy.special.betainc(a, 0.5, x)
    if theta >= pi:
        return total
    return total - _sin_power_integral(pi - theta, p)


def cap_area(theta, d):
    """Surface measure of a spherical cap of angular radius theta on S^{d-1}."""
    if not (0.0 <= theta <= pi):
        raise ConfigError(f"cap angular radius must be in [0, pi], got {theta}")
    if d == 2:
        return 2.0 * theta
    if d == 3:
        return 2.0 * pi * (1.0 - np.cos(theta))
    return sphere_area(d - 1) * _sin_power_integral(theta, d - 2)


def cap_radius(sigma, c, T, d):
    """Angular radius of the disc with surface measure sigma*d/(1-c^d)/T^d."""
    if not (sigma > 0.0):
        raise ConfigError(f"sigma must be positive, got {sigma}")
    target = sigma * d / (1.0 - c ** d) * T ** (-d)
    if target >= sphere_area(d):
        raise ConfigError(
            f"requested disc measure {target:.3g} covers the whole sphere; "
            f"increase T or decrease sigma"
        )
    if d == 2:
        return target / 2.0
    if d == 3:
        return float(np.arccos(1.0 - target / (2.0 * pi)))
    return scipy.optimize.brentq(
        lambda t: cap_area(t, d) - target, 0.0, pi, xtol=1e-15, rtol=8.9e-16
    )


@dataclass(frozen=True, eq=False)
class CapSpec:
    """Open spherical disc: angle to ``center`` strictly below the radius."""

    center: np.ndarray
    angular_radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if abs(np.linalg.norm(center) - 1.0) > 1e-8:
            raise ConfigError("cap center must be a unit vector")
        if not (0.0 < self.angular_radius <= pi):
            raise ConfigError("cap angular radius must lie in (0, pi]")
        object.__setattr__(self, "center", center)

    @property
    def d(self):
        return self.center.shape[0]

    def area(self):
        return cap_area(self.angular_radius, self.d)

    def fraction(self):
        return self.area() / sphere_area(self.d)

    def contains(self, vectors):
        return geodesic_distances(vectors, self.center) < self.angular_radius


def count_in_cap(dirs, cap, *, workers=-1):
    """Directions strictly inside the cap, via the tree prefilter."""
    idx = dirs.tree.query_ball_point(
        cap.center, _chord_query_radius(cap.angular_radius), workers=workers
    )
    if not idx:
        return 0
    candidates = dirs.vectors[np.asarray(idx, dtype=np.intp)]
    return int(np.count_nonzero(cap.contains(candidates)))


def count_in_cap_scan(dirs, cap):
    """Reference linear scan; must agree exactly with ``count_in_cap``."""
    return int(np.count_nonzero(cap.contains(dirs.vectors)))


def count_in_caps(dirs, centers, angular_radius, *, workers=-1):
    """Counts for many caps of common (or per-cap) angular radius."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    n_caps = centers.shape[0]
    radii = np.broadcast_to(np.asarray(angular_radius, dtype=float), (n_caps,))
    query_r = _chord_query_radius(float(radii.max()))
    lists = dirs.tree.query_ball_point(centers, query_r, workers=workers)
    lengths = np.fromiter((len(l) for l in lists), dtype=np.intp, count=n_caps)
    if lengths.sum() == 0:
        return np.zeros(n_caps, dtype=np.int64)
    cand = np.concatenate([np.asarray(l, dtype=np.intp) for l in lists if l])
    owner = np.repeat(np.arange(n_caps), lengths)
    u = dirs.vectors[cand]
    v = centers[owner]
    dots = np.einsum("ij,ij->i", u, v)
    rej = u - dots[:, np.newaxis] * v
    ang = np.arctan2(np.linalg.norm(rej, axis=1), dots)
    inside = ang < radii[owner]
    return np.bincount(owner[inside], minlength=n_caps).astype(np.int64)


def poisson_pair_reference(s, d):
    """Limit profile for the scaled pair counts: volume of the (d-1)-ball."""
    s = np.asarray(s, dtype=float)
    return ball_volume(d - 1) * s ** (d - 1)


@dataclass(frozen=True, eq=False)
class PairCorrelationResult:
    s: np.ndarray
    values: np.ndarray
    n_directions: int
    d: int
    scale: float
    reference: np.ndarray | None = None

    def write_csv(self, path_or_file, config=None):
        from .lattice_enum import _write_csv

        if self.reference is None:
            header = ["s", "value"]
            rows = (
                [repr(float(a)), repr(float(b))]
                for a, b in zip(self.s, self.values)
            )
        else:
            header = ["s", "value", "poisson_reference"]
            rows = (
                [repr(float(a)), repr(float(b)), repr(float(c))]
                for a, b, c in zip(self.s, self.values, self.reference)
            )
        _write_csv(path_or_file, header, rows, config)


def _pair_scale(dirs):
    n = len(dirs)
    if n < 2:
        raise ConfigError("pair correlation needs at least two directions")
    cst = dimension_constants(dirs.d)
    return cst.cd_norm * n ** (1.0 / (dirs.d - 1))


def _check_cutoff(theta_max):
    if theta_max > pi * (1.0 + 1e-12):
        raise ConfigError(
            "largest s exceeds the rescaled geodesic diameter of the sphere"
        )


def _correlation_values(scaled, s_values, n, weights=None):
    order = np.argsort(scaled, kind="stable")
    scaled = scaled[order]
    if weights is None:
        hits = 2.0 * np.searchsorted(scaled, s_values, side="right")
    else:
        cum = np.concatenate(([0.0], np.cumsum(weights[order])))
        hits = cum[np.searchsorted(scaled, s_values, side="right")]
    return hits / n


def pair_correlation(dirs, s_values):
    """Empirical pair correlation of the rescaled direction angles.

    Counts ordered pairs whose scaled angle is <= s, divided by the number
    of directions; the scale makes a Poisson process match the volume of
    the (d-1)-ball, i.e. 2s in d=2 and pi s^2 in d=3.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    n = len(dirs)
    scale = _pair_scale(dirs)
    theta_max = float(s_values.max()) / scale
    _check_cutoff(theta_max)
    pairs = dirs.tree.query_pairs(_chord_query_radius(theta_max),
                                  output_type="ndarray")
    if pairs.shape[0]:
        ang = _pair_angles(dirs.vectors, pairs[:, 0], pairs[:, 1])
    else:
        ang = np.empty(0)
    values = _correlation_values(ang * scale, s_values, n)
    return PairCorrelationResult(
        s=s_values, values=values, n_directions=n, d=dirs.d, scale=scale,
        reference=poisson_pair_reference(s_values, dirs.d),
    )


def pair_correlation_scan(dirs, s_values, *, chunk=500000):
    """Reference O(N^2) path; must agree exactly with ``pair_correlation``."""
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    n = len(dirs)
    scale = _pair_scale(dirs)
    _check_cutoff(float(s_values.max()) / scale)
    ii, jj = np.triu_indices(n, k=1)
    angles = []
    for start in range(0, ii.shape[0], chunk):
        angles.append(_pair_angles(dirs.vectors, ii[start:start + chunk],
                                   jj[start:start + chunk]))
    ang = np.concatenate(angles) if angles else np.empty(0)
    values = _correlation_values(ang * scale, s_values, n)
    return PairCorrelationResult(
        s=s_values, values=values, n_directions=n, d=dirs.d, scale=scale,
        reference=poisson_pair_reference(s_values, dirs.d),
    )


def pair_correlation_fn(dirs, f, s_max):
    """Mean of a test function over ordered close pairs.

    ``f(x, y, s)`` must be vectorised over rows and vanish for scaled
    distances beyond ``s_max``.  Returns the pair sum divided by the
    number of directions.
    """
    n = len(dirs)
    scale = _pair_scale(dirs)
    theta_max = float(s_max) / scale
    _check_cutoff(theta_max)
    pairs = dirs.tree.query_pairs(_chord_query_radius(theta_max),
                                  output_type="ndarray")
    if pairs.shape[0] == 0:
        return 0.0
    ang = _pair_angles(dirs.vectors, pairs[:, 0], pairs[:, 1])
    scaled = ang * scale
    keep = scaled <= s_max
    if not keep.any():
        return 0.0
    u = dirs.vectors[pairs[keep, 0]]
    v = dirs.vectors[pairs[keep, 1]]
    s = scaled[keep]
    total = float(np.sum(f(u, v, s))) + float(np.sum(f(v, u, s)))
    return total / n


def _region_mask(vectors, region):
    if region is None:
        return np.ones(vectors.shape[0], dtype=bool)
    if isinstance(region, CapSpec):
        return region.contains(vectors)
    mask = np.zeros(vectors.shape[0], dtype=bool)
    for cap in region:
        mask |= cap.contains(vectors)
    return mask


def pair_correlation_restricted(dirs, region1, region2, s_values):
    """Pair correlation restricted to ordered pairs with the first
    direction in ``region1`` and the second in ``region2``.

    Regions are open caps, lists of caps (unions), or None for the whole
    sphere.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    n = len(dirs)
    scale = _pair_scale(dirs)
    theta_max = float(s_values.max()) / scale
    _check_cutoff(theta_max)
    pairs = dirs.tree.query_pairs(_chord_query_radius(theta_max),
                                  output_type="ndarray")
    if pairs.shape[0] == 0:
        scaled = np.empty(0)
        weights = np.empty(0)
    else:
        ang = _pair_angles(dirs.vectors, pairs[:, 0], pairs[:, 1])
        scaled = ang * scale
        u = dirs.vectors[pairs[:, 0]]
        v = dirs.vectors[pairs[:, 1]]
        in1_u = _region_mask(u, region1)
        in2_v = _region_mask(v, region2)
        in1_v = _region_mask(v, region1)
        in2_u = _region_mask(u, region2)
        weights = (in1_u & in2_v).astype(float) + (in1_v & in2_u).astype(float)
    values = _correlation_values(scaled, s_values, n, weights=weights)
    return PairCorrelationResult(
        s=s_values, values=values, n_directions=n, d=dirs.d, scale=scale,
        reference=None,
    )


def cap_intersection_fraction(cap1, cap2):
    """Sphere fraction of the intersection of two caps.

    Handles the cases needed here: equal caps, nested caps, and caps too
    far apart to meet.  Anything else raises.
    """
    gap = geodesic_distance(cap1.center, cap2.center)
    r1, r2 = cap1.angular_radius, cap2.angular_radius
    if gap + min(r1, r2) <= max(r1, r2) + 1e-15:
        return min(cap1.fraction(), cap2.fraction())
    if gap >= r1 + r2 - 1e-15:
        return 0.0
    raise ConfigError("only nested or separated cap intersections are supported")
