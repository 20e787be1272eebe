"""Enumeration of affine lattice points in shells, balls, and cones.

An affine lattice here is ``(Z^d + xi) M0`` with ``det M0 = 1``, acting on
row vectors: the point attached to the integer vector ``m`` is
``(m + xi) @ M0``.  The workhorse is a Fincke-Pohst sweep over the
Cholesky factor of the Gram matrix, with epsilon-inflated pruning bounds
and an exact norm recheck on the accepted points, so boundary handling
does not depend on the pruning arithmetic.
"""

import csv
import json
from dataclasses import dataclass
from math import ceil, floor, sqrt

import numpy as np
import scipy.integrate
import scipy.linalg

from .constants import ball_volume, sphere_area
from .errors import BudgetError, ConfigError, NumericError

DEFAULT_POINT_BUDGET = 1e8


@dataclass(frozen=True, eq=False)
class AffineLattice:
    """``(Z^d + shift) @ matrix`` with unimodular ``matrix`` (row vectors)."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        shift = np.atleast_1d(np.array(self.shift, dtype=float))
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError(f"lattice matrix must be square, got shape {matrix.shape}")
        if shift.shape != (matrix.shape[0],):
            raise ConfigError(
                f"shift length {shift.shape} does not match matrix of size {matrix.shape[0]}"
            )
        det = np.linalg.det(matrix)
        if not np.isfinite(det) or abs(det - 1.0) > 1e-6:
            raise ConfigError(f"lattice matrix must have determinant 1, got {det!r}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "shift", shift)

    @property
    def d(self):
        return self.matrix.shape[0]

    @classmethod
    def integer(cls, d, shift=None):
        """The integer lattice Z^d, optionally translated by ``shift``."""
        if shift is None:
            shift = np.zeros(d)
        return cls(np.eye(d), shift)

    def points(self, m):
        """Map integer vectors (rows of ``m``) to lattice points."""
        return (np.asarray(m, dtype=float) + self.shift) @ self.matrix


@dataclass(frozen=True)
class ShellSpec:
    """Closed norm range ``c*T <= ||x|| <= T``."""

    c: float
    T: float

    def __post_init__(self):
        if not (0.0 <= self.c < 1.0):
            raise ConfigError(f"shell needs 0 <= c < 1, got c={self.c}")
        if not (self.T > 0.0):
            raise ConfigError(f"shell needs T > 0, got T={self.T}")


def expected_shell_count(shell, d):
    """Leading-order point count of a unimodular shell: vol of the shell."""
    return (1.0 - shell.c ** d) / d * sphere_area(d) * shell.T ** d


@dataclass(frozen=True)
class ConeSpec:
    """Truncated right circular cone around the first axis.

    Membership is ``c < x1 <= 1`` and ``||x'|| < slope * x1``; the slope
    is normalised so that the Euclidean volume equals ``sigma`` exactly.
    """

    d: int
    sigma: float
    c: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise ConfigError(f"cone needs d >= 2, got {self.d}")
        if not (self.sigma > 0.0):
            raise ConfigError(f"cone needs sigma > 0, got {self.sigma}")
        if not (0.0 <= self.c < 1.0):
            raise ConfigError(f"cone needs 0 <= c < 1, got c={self.c}")

    @property
    def slope(self):
        """Lateral radius per unit axial coordinate."""
        d = self.d
        return (self.sigma * d / ((1.0 - self.c ** d) * ball_volume(d - 1))) ** (
            1.0 / (d - 1)
        )

    @property
    def bounding_radius(self):
        return sqrt(1.0 + self.slope ** 2)

    @property
    def volume(self):
        return self.sigma

    def volume_quadrature(self):
        """Volume by quadrature over cross-sections (consistency check)."""
        slope, d = self.slope, self.d
        area = ball_volume(d - 1)
        value, _ = scipy.integrate.quad(
            lambda x1: area * (slope * x1) ** (d - 1), self.c, 1.0
        )
        return value

    def contains(self, points):
        """Boolean membership mask for an array of row vectors."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        x1 = points[:, 0]
        lateral = np.linalg.norm(points[:, 1:], axis=1)
        return (x1 > self.c) & (x1 <= 1.0) & (lateral < self.slope * x1)


def integer_points_in_ball(matrix, shift, radius, *, budget=DEFAULT_POINT_BUDGET,
                           inflate=1e-9):
    """Integer vectors m with ``||(m + shift) @ matrix|| <= radius``, roughly.

    Returns ``(m, x, norms)`` where ``x = (m + shift) @ matrix``.  The set
    is a superset of the closed ball: pruning bounds are inflated by the
    relative ``inflate``, so points within that sliver of the boundary may
    be included.  Callers filter on the returned norms, which are
    recomputed exactly from the points.  ``matrix`` may be rectangular
    (k independent rows spanning a rank-k lattice in R^n).
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    shift = np.asarray(shift, dtype=float)
    d = matrix.shape[0]
    if radius <= 0.0:
        raise ConfigError(f"radius must be positive, got {radius}")
    gram = matrix @ matrix.T
    gram_det = np.linalg.det(gram)
    if not np.isfinite(gram_det) or gram_det <= 0.0:
        raise NumericError(f"degenerate basis in enumeration (Gram det={gram_det!r})")
    expected = ball_volume(d) * radius ** d / sqrt(gram_det)
    if expected > budget:
        raise BudgetError(
            f"ball enumeration expects ~{expected:.3g} points, over the budget "
            f"{budget:.3g}; shrink the radius or raise the budget",
            bound_reached=budget,
        )

    try:
        R = scipy.linalg.cholesky(gram, lower=False)
    except scipy.linalg.LinAlgError as exc:
        raise NumericError(f"Cholesky failed on the Gram matrix: {exc}") from exc

    r2 = (radius * (1.0 + inflate)) ** 2
    hard_cap = 2.0 * budget + 1000.0
    blocks = []
    count = 0

    def descend(level, rem2, w, prefix):
        nonlocal count
        rii = R[level, level]
        half = sqrt(max(rem2, 0.0))
        lo = ceil((-half - w[level]) / rii - shift[level])
        hi = floor((half - w[level]) / rii - shift[level])
        if hi < lo:
            return
        if level == 0:
            ms = np.arange(lo, hi + 1)
            q = (rii * (ms + shift[0]) + w[0]) ** 2
            ms = ms[q <= rem2]
            if ms.size == 0:
                return
            count += ms.size
            if count > hard_cap:
                raise BudgetError(
                    f"ball enumeration exceeded the hard cap {hard_cap:.3g}",
                    bound_reached=hard_cap,
                )
            block = np.empty((ms.size, d), dtype=np.int64)
            block[:, 0] = ms
            if d > 1:
                block[:, 1:] = prefix[::-1]
            blocks.append(block)
            return
        for m in range(lo, hi + 1):
            z = m + shift[level]
            term = (rii * z + w[level]) ** 2
            if term > rem2:
                continue
            descend(level - 1, rem2 - term, w + R[:, level] * z, prefix + [m])

    descend(d - 1, r2, np.zeros(d), [])
    if not blocks:
        m_all = np.empty((0, d), dtype=np.int64)
    else:
        m_all = np.vstack(blocks)
    x = (m_all + shift) @ matrix
    norms = np.linalg.norm(x, axis=1)
    return m_all, x, norms


def _norm_then_lex_order(m, norms):
    # primary key: norm; ties broken lexicographically on the integer vector
    keys = tuple(m[:, j] for j in reversed(range(m.shape[1]))) + (norms,)
    return np.lexsort(keys)


@dataclass(frozen=True, eq=False)
class ShellPoints:
    """Enumerated shell of an affine lattice, sorted by norm (ties: lex on m)."""

    m: np.ndarray
    points: np.ndarray
    norms: np.ndarray
    lattice: AffineLattice
    shell: ShellSpec

    def __len__(self):
        return self.norms.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    def without_origin(self):
        """Drop zero-norm points (present only for integral shifts, c = 0)."""
        keep = self.norms > 0.0
        if keep.all():
            return self
        return ShellPoints(self.m[keep], self.points[keep], self.norms[keep],
                           self.lattice, self.shell)

    def write_csv(self, path_or_file, config=None):
        d = self.d
        header = [f"m{i + 1}" for i in range(d)] + [f"x{i + 1}" for i in range(d)]
        header.append("norm")
        rows = (
            [int(v) for v in self.m[i]]
            + [repr(float(v)) for v in self.points[i]]
            + [repr(float(self.norms[i]))]
            for i in range(len(self))
        )
        _write_csv(path_or_file, header, rows, config)


def _write_csv(path_or_file, header, rows, config=None):
    """Comma-separated, '.' decimals, LF endings, optional config comment."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        if config is not None:
            fh.write("# config " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    finally:
        if own:
            fh.close()


def enumerate_shell(lattice, shell, *, budget=DEFAULT_POINT_BUDGET):
    """All lattice points with ``c*T <= ||x|| <= T``, sorted by norm.

    The closed shell includes the origin when the shift is integral and
    ``c = 0``; direction-based statistics drop it via ``without_origin``.
    """
    expected = expected_shell_count(shell, lattice.d)
    if expected > budget:
        raise BudgetError(
            f"shell holds ~{expected:.3g} points, over the budget {budget:.3g}; "
            f"raise c or lower T",
            bound_reached=budget,
        )
    m, x, norms = integer_points_in_ball(
        lattice.matrix, lattice.shift, shell.T, budget=budget
    )
    keep = (norms >= shell.c * shell.T) & (norms <= shell.T)
    m, x, norms = m[keep], x[keep], norms[keep]
    order = _norm_then_lex_order(m, norms)
    return ShellPoints(m[order], x[order], norms[order], lattice, shell)


def brute_force_shell(lattice, shell, *, max_box_radius=10):
    """Oracle: exhaustive box scan, no shared code with the pruning sweep.

    Intended for small instances; refuses integer boxes wider than
    ``max_box_radius`` per coordinate.
    """
    M = lattice.matrix
    xi = lattice.shift
    d = lattice.d
    opnorm = np.linalg.norm(np.linalg.inv(M), 2)
    box = int(np.ceil(shell.T * opnorm + np.max(np.abs(xi)))) + 1
    if box > max_box_radius:
        raise BudgetError(
            f"oracle box radius {box} exceeds {max_box_radius}",
            bound_reached=max_box_radius,
        )
    axes = [np.arange(-box, box + 1)] * d
    m = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    x = (m + xi) @ M
    norms = np.linalg.norm(x, axis=1)
    keep = (norms >= shell.c * shell.T) & (norms <= shell.T)
    m, x, norms = m[keep], x[keep], norms[keep]
    order = _norm_then_lex_order(m, norms)
    return ShellPoints(m[order], x[order], norms[order], lattice, shell)


def count_in_cone(lattice, cone, *, budget=DEFAULT_POINT_BUDGET):
    """Number of lattice points inside the cone."""
    return counts_in_cones(lattice, [cone], budget=budget)[0]


def counts_in_cones(lattice, cones, *, budget=DEFAULT_POINT_BUDGET):
    """Counts for several cones from one shared enumeration."""
    cones = list(cones)
    if not cones:
        return []
    radius = max(cone.bounding_radius for cone in cones)
    _, x, _ = integer_points_in_ball(lattice.matrix, lattice.shift, radius,
                                     budget=budget)
    return [int(cone.contains(x).sum()) if x.size else 0 for cone in cones]
