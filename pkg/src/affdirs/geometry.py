"""Affine group elements, Iwasawa and Siegel coordinates, and the
reduced-coordinate functionals built on them.

Everything acts on row vectors: the element ``(M, b)`` sends ``x`` to
``x @ M + b``, and composition is ``(M1, b1)(M2, b2) = (M1 M2, b1 M2 + b2)``.
The integer subgroup (unimodular integer matrices with integer shifts)
acts on the left; ``siegel_reduce`` picks a distinguished representative
of that orbit whose Gram-Schmidt norm profile is intrinsic to the
underlying affine lattice.
"""

from dataclasses import dataclass
from math import ceil, exp, floor, sqrt

import numpy as np
import scipy.linalg

from .constants import dimension_constants
from .errors import ConfigError, NumericError
from .lattice_enum import (
    DEFAULT_POINT_BUDGET,
    AffineLattice,
    count_in_cone,
    counts_in_cones,
)
from .reduction import hkz_reduce, integer_det

DEFAULT_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class AffineGroupElement:
    """Pair ``(matrix, shift)`` acting on rows as ``x @ matrix + shift``."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        shift = np.atleast_1d(np.array(self.shift, dtype=float))
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError(f"matrix must be square, got shape {matrix.shape}")
        if shift.shape != (matrix.shape[0],):
            raise ConfigError("shift length does not match matrix size")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "shift", shift)

    @property
    def d(self):
        return self.matrix.shape[0]

    def apply(self, points):
        return np.asarray(points, dtype=float) @ self.matrix + self.shift

    def compose(self, other):
        return multiply(self, other)


def multiply(g1, g2):
    return AffineGroupElement(g1.matrix @ g2.matrix,
                              g1.shift @ g2.matrix + g2.shift)


def inverse(g):
    minv = np.linalg.inv(g.matrix)
    return AffineGroupElement(minv, -g.shift @ minv)


def identity(d):
    return AffineGroupElement(np.eye(d), np.zeros(d))


def lattice_of(g):
    """The affine lattice swept out by the integer orbit of ``g``."""
    xi = np.linalg.solve(g.matrix.T, g.shift)
    return AffineLattice(g.matrix, xi)


def element_of(lattice):
    return AffineGroupElement(lattice.matrix, lattice.shift @ lattice.matrix)


def unipotent_matrix(u, d):
    """Upper unit-triangular matrix from row-major strict-upper entries."""
    u = np.asarray(u, dtype=float)
    if u.shape != (d * (d - 1) // 2,):
        raise ConfigError(f"expected {d * (d - 1) // 2} entries for d={d}")
    N = np.eye(d)
    idx = 0
    for i in range(d):
        for j in range(i + 1, d):
            N[i, j] = u[idx]
            idx += 1
    return N


@dataclass(frozen=True, eq=False)
class IwasawaCoordinates:
    """Triangular-orthogonal coordinates ``M = n(u) a(v) k``.

    ``u`` holds the strict upper entries of the unipotent factor in
    row-major order, ``v`` the positive diagonal (product 1 for
    unimodular input), and ``k`` the rotation.
    """

    u: np.ndarray
    v: np.ndarray
    k: np.ndarray

    @property
    def d(self):
        return self.v.shape[0]

    def reconstruct(self):
        return unipotent_matrix(self.u, self.d) @ np.diag(self.v) @ self.k


def iwasawa(M, *, cond_limit=DEFAULT_COND_LIMIT):
    """Factor ``M = n(u) a(v) k`` with positive ``v`` and ``k`` a rotation."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {M.shape}")
    det = np.linalg.det(M)
    if not np.isfinite(det) or abs(det - 1.0) > 1e-6:
        raise ConfigError(f"matrix must have determinant 1, got {det!r}")
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > cond_limit:
        raise NumericError(f"matrix too ill-conditioned ({cond:.3g}) to factor")
    R, Q = scipy.linalg.rq(M)
    signs = np.sign(np.diag(R))
    if np.any(signs == 0.0):
        raise NumericError("zero diagonal in triangular factor")
    R = R * signs[np.newaxis, :]
    Q = signs[:, np.newaxis] * Q
    if np.linalg.det(Q) < 0.0:
        raise NumericError("orthogonal factor has determinant -1")
    d = M.shape[0]
    v = np.diag(R).copy()
    u = np.array([R[i, j] / R[j, j] for i in range(d) for j in range(i + 1, d)])
    return IwasawaCoordinates(u=u, v=v, k=Q)


def expanding_flow(t, d):
    """Diagonal flow contracting the first axis, ``det = 1``.

    At time ``t = d log T`` the expanding entries equal ``T``.
    """
    return np.diag([exp(-(d - 1) * t / d)] + [exp(t / d)] * (d - 1))


def horospherical_shear(y):
    """Identity matrix with first row ``(1, y)``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y.shape[0] + 1
    M = np.eye(d)
    M[0, 1:] = y
    return M


def rotate_to_e1(v):
    """Rotation ``K`` with ``v @ K = e1``, turning in the plane of v and e1.

    This is the exponential of the antisymmetric generator attached to the
    tangent coordinates of ``v``; undefined at the antipode ``-e1``.
    """
    v = np.asarray(v, dtype=float)
    d = v.shape[0]
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ConfigError("rotate_to_e1 expects a unit vector")
    if v[0] <= -1.0 + 1e-12:
        raise ConfigError("rotation to e1 undefined at the antipode of e1")
    w = v[1:]
    K = np.empty((d, d))
    K[0, 0] = v[0]
    K[0, 1:] = -w
    K[1:, 0] = w
    K[1:, 1:] = np.eye(d - 1) - np.outer(w, w) / (1.0 + v[0])
    return K


def tangent_coordinates(v):
    """Tangent vector at e1 whose norm is the angle from e1 to ``v``."""
    v = np.asarray(v, dtype=float)
    theta = np.arccos(np.clip(v[0], -1.0, 1.0))
    w = v[1:]
    s = np.linalg.norm(w)
    if s < 1e-15:
        return np.zeros(v.shape[0] - 1)
    return (theta / s) * w


@dataclass(frozen=True, eq=False)
class SiegelCoordinates:
    """Distinguished orbit representative under the integer subgroup.

    ``matrix = gamma @ M`` is the reduced linear part, ``b`` the shift
    written in its integer frame and folded into ``[-1/2, 1/2)^d``; the
    represented element is ``(matrix, b @ matrix)``.
    """

    matrix: np.ndarray
    gamma: np.ndarray
    b: np.ndarray
    iwasawa: IwasawaCoordinates

    @property
    def d(self):
        return self.matrix.shape[0]

    @property
    def v(self):
        return self.iwasawa.v

    def element(self):
        return AffineGroupElement(self.matrix, self.b @ self.matrix)


def siegel_ratio_bound(d):
    """Published bound on consecutive ratios ``v[j+1] / v[j]`` after reduction."""
    return (2.0 / sqrt(3.0)) * 2.0 ** ((d - 1) / 2.0)


def siegel_reduce(g, *, cond_limit=DEFAULT_COND_LIMIT):
    """Reduce ``g`` modulo the integer subgroup.

    The linear part is basis-reduced so that, reading the rows back to
    front, each Gram-Schmidt norm achieves the first minimum of the
    corresponding projected lattice; the shift is folded into the unit
    box of the reduced frame.  ``v`` (and ``|b|`` up to coordinate signs)
    then depend only on the orbit, not on the representative.
    """
    M = np.asarray(g.matrix, dtype=float)
    det = np.linalg.det(M)
    if not np.isfinite(det) or abs(det - 1.0) > 1e-6:
        raise ConfigError(f"matrix must have determinant 1, got {det!r}")
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > cond_limit:
        raise NumericError(f"matrix too ill-conditioned ({cond:.3g}) to reduce")
    C, W = hkz_reduce(M[::-1])
    A = np.array(C[::-1], dtype=float)
    gamma = W[::-1, ::-1]
    det_gamma = integer_det(gamma)
    if det_gamma == -1:
        gamma = gamma.copy()
        gamma[0] = -gamma[0]
        A[0] = -A[0]
    elif det_gamma != 1:
        raise NumericError(f"reduction transform has determinant {det_gamma}")
    coords = iwasawa(A, cond_limit=cond_limit)
    y = np.linalg.solve(A.T, g.shift)
    b = y - np.floor(y + 0.5)
    return SiegelCoordinates(matrix=A, gamma=gamma, b=b, iwasawa=coords)


def _as_siegel(g, cond_limit=DEFAULT_COND_LIMIT):
    if isinstance(g, SiegelCoordinates):
        return g
    return siegel_reduce(g, cond_limit=cond_limit)


def tall_count(v, r, constants=None):
    """Largest index s (1-based) with ``v[s-1] > 2 * cd_siegel * r``; 0 if none.

    Only the first ``d - 1`` entries are eligible.
    """
    v = np.asarray(v, dtype=float)
    cst = constants or dimension_constants(v.shape[0])
    threshold = 2.0 * cst.cd_siegel * r
    s = 0
    for i in range(v.shape[0] - 1):
        if v[i] > threshold:
            s = i + 1
    return s


def escape_mass_profile(v, b, R, eta, r):
    """The escape-of-mass functional from a reduced coordinate profile."""
    if R < 1.0:
        raise ConfigError(f"threshold R must be >= 1, got {R}")
    if r <= 0.0:
        raise ConfigError(f"region radius r must be positive, got {r}")
    v = np.asarray(v, dtype=float)
    b = np.asarray(b, dtype=float)
    cst = dimension_constants(v.shape[0])
    s = tall_count(v, r, cst)
    if float(np.prod(v[:s])) < R:
        return 0.0
    band = cst.cd_siegel * r
    for i in range(s):
        if abs(v[i] * b[i]) > band:
            return 0.0
    return float(np.prod(v[:s] ** eta))


def escape_mass(g, R, eta, r, *, cond_limit=DEFAULT_COND_LIMIT):
    """Reduced-coordinate escape functional; invariant under the integer
    subgroup acting on the left."""
    coords = _as_siegel(g, cond_limit)
    return escape_mass_profile(coords.v, coords.b, R, eta, r)


def reduced_count_bound(g, region, eta, *, cond_limit=DEFAULT_COND_LIMIT):
    """Upper envelope for ``(number of orbit points in the region) ** eta``.

    ``region`` is either a cone spec (anything with ``bounding_radius``)
    or a plain radius; the bound only sees ``max(delta_d, radius)`` and
    the reduced coordinates.  Each factor beyond the leading constant is
    ``v[i]**eta`` times a zero-or-one integer count, so the envelope
    vanishes exactly when the shifted integer line misses the allowed
    band.
    """
    coords = _as_siegel(g, cond_limit)
    radius = float(getattr(region, "bounding_radius", region))
    d = coords.d
    cst = dimension_constants(d)
    r = max(cst.delta_d, radius)
    v, b = coords.v, coords.b
    s = tall_count(v, r, cst)
    bound = (cst.C_d * r ** d) ** eta
    band = cst.cd_siegel * r
    for i in range(s):
        lo = -band / v[i] - b[i]
        hi = band / v[i] - b[i]
        n_in = max(0, floor(hi) - ceil(lo) + 1)
        bound *= v[i] ** eta * n_in
    return bound


def cone_count(g, cone, *, budget=DEFAULT_POINT_BUDGET):
    """Number of integer-orbit points of ``g`` inside the cone."""
    return count_in_cone(lattice_of(g), cone, budget=budget)


def cone_counts(g, cones, *, budget=DEFAULT_POINT_BUDGET):
    return counts_in_cones(lattice_of(g), cones, budget=budget)
