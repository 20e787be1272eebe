"""Monte Carlo experiments around the limit theorems.

Each experiment draws every random input from a single counter-based
Philox stream keyed by the run seed, so results are reproducible
bit-for-bit regardless of how the work is chunked internally.  The
heavy lifting (shell enumeration, cap counting, reduction) lives in the
other modules; this one wires them into estimators with standard
errors.
"""

from dataclasses import dataclass
from math import ceil, log, sqrt

import numpy as np
from scipy.integrate import quad

from .constants import dimension_constants
from .diophantine import as_xi
from .errors import ConfigError
from .geometry import (
    AffineGroupElement,
    cone_count,
    expanding_flow,
    horospherical_shear,
    rotate_to_e1,
    siegel_reduce,
    escape_mass_profile,
)
from .lattice_enum import (
    DEFAULT_POINT_BUDGET,
    AffineLattice,
    ConeSpec,
    ShellSpec,
    enumerate_shell,
)
from .sphere_stats import CapSpec, cap_radius, count_in_caps, directions_of


def rng_for(seed):
    """The run-level random stream: Philox keyed by the seed."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


def sample_directions(rng, n, d, *, measure="uniform", density=None,
                      density_bound=None):
    """Draw n directions on the (d-1)-sphere.

    ``measure`` is "uniform", "hemisphere" (first coordinate >= 0), or
    "custom" with a density (relative to uniform) and a finite bound on
    it for rejection sampling.
    """
    if n < 1:
        raise ConfigError(f"need at least one sample, got {n}")
    x = rng.standard_normal((n, d))
    norms = np.linalg.norm(x, axis=1)
    while (bad := norms < 1e-12).any():
        x[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(x, axis=1)
    points = x / norms[:, np.newaxis]
    if measure == "uniform":
        return points
    if measure == "hemisphere":
        points[:, 0] = np.abs(points[:, 0])
        return points
    if measure == "custom":
        if density is None or density_bound is None or density_bound <= 0:
            raise ConfigError(
                "custom measure needs a density and a positive bound on it"
            )
        pending = np.arange(n)
        rounds = 0
        while pending.size:
            rounds += 1
            if rounds > 10000:
                raise ConfigError(
                    "rejection sampling is not terminating; "
                    "is density_bound actually an upper bound?"
                )
            vals = np.asarray(density(points[pending]), dtype=float)
            rejected = pending[rng.random(pending.size) * density_bound > vals]
            if rejected.size:
                points[rejected] = sample_directions(rng, rejected.size, d)
            pending = rejected
        return points
    raise ConfigError(f"unknown sampling measure {measure!r}")


# ---------------------------------------------------------------------------
# cap-count runs: one enumeration, many random caps, several sigmas


@dataclass(frozen=True, eq=False)
class CapCountRun:
    """Counts of shell directions inside random caps.

    ``counts[j, i]`` is the number of directions inside the cap of
    target density ``sigmas[j]`` around the i-th sampled center.
    """

    sigmas: tuple
    thetas: np.ndarray
    counts: np.ndarray
    centers: np.ndarray
    d: int
    c: float
    T: float
    n_directions: int
    samples: int
    seed: int
    measure: str

    def index_of(self, sigma):
        for j, s in enumerate(self.sigmas):
            if s == sigma:
                return j
        raise ConfigError(f"sigma {sigma} not in run (have {self.sigmas})")

    def mean(self, j):
        """Sample mean and standard error of the j-th cap count."""
        col = self.counts[j].astype(float)
        return float(col.mean()), float(col.std(ddof=1) / sqrt(self.samples))

    def product_moment(self, j1, j2):
        """Mean and SE of the product count N_{sigma_j1} * N_{sigma_j2}."""
        prod = self.counts[j1].astype(float) * self.counts[j2]
        return float(prod.mean()), float(prod.std(ddof=1) / sqrt(self.samples))


def cap_count_run(lattice, shell, sigmas, samples, seed, *, measure="uniform",
                  workers=-1, budget=DEFAULT_POINT_BUDGET):
    sigmas = tuple(float(s) for s in sigmas)
    if not sigmas or any(s <= 0 for s in sigmas):
        raise ConfigError(f"sigmas must be positive, got {sigmas}")
    d = lattice.d
    points = enumerate_shell(lattice, shell, budget=budget).without_origin()
    dirs = directions_of(points)
    thetas = np.array([cap_radius(s, shell.c, shell.T, d) for s in sigmas])
    rng = rng_for(seed)
    centers = sample_directions(rng, samples, d, measure=measure)
    counts = np.stack(
        [count_in_caps(dirs, centers, th, workers=workers) for th in thetas]
    )
    return CapCountRun(
        sigmas=sigmas, thetas=thetas, counts=counts, centers=centers,
        d=d, c=shell.c, T=shell.T, n_directions=len(dirs),
        samples=samples, seed=seed, measure=measure,
    )


def moment_hypothesis(d, exponents):
    """Sum of positive real parts and which convergence regime it falls in.

    Returns ("A1" | "A2" | None, eta): "A1" needs nothing of the shift,
    "A2" needs a vague-Diophantine shift, None means the moments may
    genuinely diverge in the limit.
    """
    eta = float(sum(max(complex(z).real, 0.0) for z in exponents))
    if eta < d:
        return "A1", eta
    if eta < d + 1:
        return "A2", eta
    return None, eta


@dataclass(frozen=True, eq=False)
class MomentEstimate:
    exponents: tuple
    value: complex
    se: float
    regime: str | None
    eta: float
    K: int | None
    restricted_value: complex | None
    restricted_se: float | None


def empirical_moment(run, exponents, *, K=None, force=False):
    """Monte Carlo estimate of the shifted mixed moment E[prod (N_j+1)^{z_j}].

    With K set, also reports the restricted version where samples whose
    max count exceeds K are dropped from the integrand (not renormalized).
    """
    exponents = tuple(complex(z) for z in exponents)
    if len(exponents) != len(run.sigmas):
        raise ConfigError(
            f"{len(run.sigmas)} sigmas but {len(exponents)} exponents"
        )
    regime, eta = moment_hypothesis(run.d, exponents)
    if regime is None and not force:
        raise ConfigError(
            f"sum of positive real parts {eta} >= d+1 = {run.d + 1}: "
            "the limit moment diverges; pass force=True to estimate anyway"
        )
    logs = np.log1p(run.counts.astype(float))
    values = np.exp(np.tensordot(exponents, logs, axes=(0, 0)))
    mean = complex(values.mean())
    se = float(
        sqrt((values.real.var(ddof=1) + values.imag.var(ddof=1)) / run.samples)
    )
    restricted = restricted_se = None
    if K is not None:
        if K < 0:
            raise ConfigError(f"K must be >= 0, got {K}")
        kept = np.where(run.counts.max(axis=0) <= K, values, 0.0)
        restricted = complex(kept.mean())
        restricted_se = float(
            sqrt((kept.real.var(ddof=1) + kept.imag.var(ddof=1)) / run.samples)
        )
    return MomentEstimate(
        exponents=exponents, value=mean, se=se, regime=regime, eta=eta,
        K=K, restricted_value=restricted, restricted_se=restricted_se,
    )


@dataclass(frozen=True, eq=False)
class LimitDistribution:
    """Empirical joint law of cap counts at several sigmas."""

    sigmas: tuple
    counts: np.ndarray
    samples: int

    def joint(self):
        rows, freqs = np.unique(self.counts.T, axis=0, return_counts=True)
        return {tuple(int(v) for v in row): int(f)
                for row, f in zip(rows, freqs)}

    def marginal(self, j):
        """(values, probabilities, binomial SEs) for the j-th count."""
        values, freqs = np.unique(self.counts[j], return_counts=True)
        p = freqs / self.samples
        se = np.sqrt(p * (1.0 - p) / self.samples)
        return values, p, se

    def marginal_mean(self, j):
        col = self.counts[j].astype(float)
        return float(col.mean()), float(col.std(ddof=1) / sqrt(self.samples))

    def tail_mass(self, r0, j=None):
        """P(count >= r0), for one sigma or for the max over all of them."""
        if j is None:
            hits = (self.counts.max(axis=0) >= r0).sum()
        else:
            hits = (self.counts[j] >= r0).sum()
        return float(hits / self.samples)


def empirical_limit_distribution(run):
    return LimitDistribution(
        sigmas=run.sigmas, counts=run.counts, samples=run.samples
    )


# ---------------------------------------------------------------------------
# Siegel mean-value Monte Carlo at d=2


def _sample_fundamental_domain(rng, n):
    """(x, y) with x+iy Haar-distributed on the modular fundamental domain."""
    x = rng.uniform(-0.5, 0.5, n)
    y = (sqrt(3.0) / 2.0) / (1.0 - rng.random(n))
    draws = n
    while (bad := x * x + y * y < 1.0).any():
        k = int(bad.sum())
        draws += k
        x[bad] = rng.uniform(-0.5, 0.5, k)
        y[bad] = (sqrt(3.0) / 2.0) / (1.0 - rng.random(k))
        if draws > 100 * n:
            raise ConfigError("fundamental-domain rejection efficiency < 1%")
    return x, y, n / draws


@dataclass(frozen=True, eq=False)
class MeanValueCheck:
    """Off-diagonal and diagonal pair sums against their exact means."""

    sigma1: float
    sigma2: float
    samples: int
    seed: int
    acceptance_rate: float
    offdiag_mean: float
    offdiag_se: float
    offdiag_expected: float
    diagonal_mean: float
    diagonal_se: float
    diagonal_expected: float
    count_means: tuple
    count_ses: tuple

    @property
    def offdiag_z(self):
        return (self.offdiag_mean - self.offdiag_expected) / self.offdiag_se

    @property
    def diagonal_z(self):
        return (self.diagonal_mean - self.diagonal_expected) / self.diagonal_se


def siegel_mc_check_d2(sigma1, sigma2, samples, seed, *, chunk_target=2_000_000):
    """Haar-average the double lattice sum over two cones at d=2.

    Each sample is the affine lattice (Z^2 + xi) M with M = n(x) a(y) k
    drawn from the classical fundamental domain and xi uniform on the
    unit torus (the Haar measure on the fiber is uniform in the
    integer-frame shift, not in the ambient translation).  The sum over
    ordered pairs of distinct lattice points of the product of cone
    indicators has exact mean sigma1*sigma2; the diagonal sum (both
    indicators at the same point) has exact mean min(sigma1, sigma2).
    The cones share an axis, so the intersection is just the narrower
    cone.
    """
    if sigma1 <= 0 or sigma2 <= 0:
        raise ConfigError(f"sigmas must be positive, got {sigma1}, {sigma2}")
    if samples < 2:
        raise ConfigError(f"need at least 2 samples, got {samples}")
    lo, hi = sorted((float(sigma1), float(sigma2)))
    cone_lo, cone_hi = ConeSpec(2, lo), ConeSpec(2, hi)
    rng = rng_for(seed)
    x, y, acceptance = _sample_fundamental_domain(rng, samples)
    phi = rng.uniform(0.0, 2.0 * np.pi, samples)
    xis = rng.uniform(-0.5, 0.5, (samples, 2))

    sy = np.sqrt(y)
    cp, sp = np.cos(phi), np.sin(phi)
    mats = np.empty((samples, 2, 2))
    mats[:, 0, 0] = sy * cp - (x / sy) * sp
    mats[:, 0, 1] = sy * sp + (x / sy) * cp
    mats[:, 1, 0] = -sp / sy
    mats[:, 1, 1] = cp / sy

    # operator norm of each 2x2 unimodular matrix, for the search box:
    # (m + xi) M in the cone ball forces |m| <= |M^-1| r + |xi|
    frob2 = np.einsum("bij,bij->b", mats, mats)
    opnorm = np.sqrt((frob2 + np.sqrt(np.maximum(frob2 * frob2 - 4.0, 0.0))) / 2.0)
    reach = cone_hi.bounding_radius + 1e-9
    pad = sqrt(0.5) + 1e-9

    n_lo = np.zeros(samples, dtype=np.int64)
    n_hi = np.zeros(samples, dtype=np.int64)
    order = np.argsort(opnorm)
    boxes = np.ceil(opnorm[order] * reach + pad).astype(np.int64)
    grid_sizes = (2 * boxes + 1) ** 2
    pos = 0
    while pos < samples:
        # widest chunk whose total grid work stays under the target; sizes
        # are sorted, so the last element of the chunk is the binding one
        width = 1
        while (
            pos + width < samples
            and width < 8192
            and grid_sizes[pos + width] * (width + 1) <= chunk_target
        ):
            width += 1
        idx = order[pos:pos + width]
        box = int(boxes[pos + width - 1])
        side = np.arange(-box, box + 1)
        grid = np.stack(np.meshgrid(side, side, indexing="ij"), axis=-1)
        grid = grid.reshape(-1, 2).astype(float)
        pts = np.matmul(grid[np.newaxis] + xis[idx, np.newaxis, :], mats[idx])
        x1 = pts[..., 0]
        lat = np.abs(pts[..., 1])
        base = (x1 > 0.0) & (x1 <= 1.0)
        n_lo[idx] = (base & (lat < cone_lo.slope * x1)).sum(axis=1)
        n_hi[idx] = (base & (lat < cone_hi.slope * x1)).sum(axis=1)
        pos += width

    n1, n2 = (n_lo, n_hi) if sigma1 <= sigma2 else (n_hi, n_lo)
    offdiag = (n1 * n2 - n_lo).astype(float)
    diagonal = n_lo.astype(float)
    root = sqrt(samples)
    return MeanValueCheck(
        sigma1=float(sigma1), sigma2=float(sigma2), samples=samples, seed=seed,
        acceptance_rate=float(acceptance),
        offdiag_mean=float(offdiag.mean()),
        offdiag_se=float(offdiag.std(ddof=1) / root),
        offdiag_expected=float(sigma1) * float(sigma2),
        diagonal_mean=float(diagonal.mean()),
        diagonal_se=float(diagonal.std(ddof=1) / root),
        diagonal_expected=lo,
        count_means=(float(n1.mean()), float(n2.mean())),
        count_ses=(float(n1.std(ddof=1) / root), float(n2.std(ddof=1) / root)),
    )


# ---------------------------------------------------------------------------
# escape of mass along expanding horospheres


def _bump(u):
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def _bump_integral_1d():
    value, _ = quad(lambda u: np.exp(-1.0 / (1.0 - u * u)), -1.0, 1.0)
    return value


def _sample_weight(rng, n, q, psi):
    """Sample y from the psi-normalized density on [-1,1]^q.

    Returns (samples, integral of psi), so that
    integral(psi * F) ~= integral(psi) * mean(F(y_i)).
    """
    if psi == "constant":
        return rng.uniform(-1.0, 1.0, (n, q)), 2.0 ** q
    if psi == "bump":
        bound = np.exp(-1.0) ** q
        ys = rng.uniform(-1.0, 1.0, (n, q))
        vals = np.prod(_bump(ys), axis=1)
        while (bad := rng.random(n) * bound > vals).any():
            k = int(bad.sum())
            ys[bad] = rng.uniform(-1.0, 1.0, (k, q))
            vals = np.prod(_bump(ys), axis=1)
            # the accept test redraws uniforms for everyone; harmless for
            # correctness (each round is a fresh independent thinning)
        return ys, _bump_integral_1d() ** q
    raise ConfigError(f"psi must be 'constant' or 'bump', got {psi!r}")


@dataclass(frozen=True, eq=False)
class EscapeScan:
    """Estimates of the weighted escape functional on a (t, R) grid."""

    t_values: tuple
    R_values: tuple
    eta: float
    r: float
    estimates: np.ndarray
    ses: np.ndarray
    samples: int
    seed: int
    psi: str
    psi_integral: float
    drops: int
    drop_fraction: float
    flagged: bool

    def max_over_t(self):
        return self.estimates.max(axis=0)


def escape_scan(xi, t_values, R_values, *, eta, r=None, m0=None,
                psi="constant", samples=1000, seed=0):
    """Scan the escape-of-mass functional over flow times and thresholds.

    One reduction per (sample, t); all R thresholds are read off the
    same reduced coordinates, so the estimates are pointwise
    nonincreasing in R on every run.
    """
    xi_f, _ = as_xi(xi)
    d = xi_f.shape[0]
    consts = dimension_constants(d)
    if eta <= 0:
        raise ConfigError(f"eta must be positive, got {eta}")
    r = float(consts.delta_d if r is None else r)
    if r < consts.delta_d:
        raise ConfigError(
            f"r must be at least delta_d = {consts.delta_d} at d={d}, got {r}"
        )
    t_values = tuple(float(t) for t in t_values)
    R_values = tuple(float(R) for R in R_values)
    if any(R < 1 for R in R_values):
        raise ConfigError(f"thresholds must be >= 1, got {R_values}")
    m0 = np.eye(d) if m0 is None else np.asarray(m0, dtype=float)
    q = d - 1
    rng = rng_for(seed)
    ys, psi_integral = _sample_weight(rng, samples, q, psi)

    shears = np.tile(np.eye(d), (samples, 1, 1))
    shears[:, 0, 1:] = ys
    estimates = np.zeros((len(t_values), len(R_values)))
    ses = np.zeros_like(estimates)
    drops = 0
    for ti, t in enumerate(t_values):
        flow = expanding_flow(t, d)
        mats = np.einsum("ij,bjk,kl->bil", m0, shears, flow)
        shifts = np.einsum("j,bjl->bl", xi_f, mats)
        values = np.full((samples, len(R_values)), np.nan)
        for i in range(samples):
            g = AffineGroupElement(mats[i], shifts[i])
            try:
                coords = siegel_reduce(g)
            except ArithmeticError:
                drops += 1
                continue
            v, bred = coords.v, coords.b
            for Ri, R in enumerate(R_values):
                values[i, Ri] = escape_mass_profile(v, bred, R, eta, r)
        kept = values[~np.isnan(values[:, 0])]
        if len(kept) < 2:
            raise ConfigError(
                f"almost all samples dropped at t={t}; raise the condition "
                "limit or lower t"
            )
        estimates[ti] = psi_integral * kept.mean(axis=0)
        ses[ti] = psi_integral * kept.std(axis=0, ddof=1) / sqrt(len(kept))
    total = samples * len(t_values)
    drop_fraction = drops / total
    return EscapeScan(
        t_values=t_values, R_values=R_values, eta=float(eta), r=r,
        estimates=estimates, ses=ses, samples=samples, seed=seed,
        psi=psi, psi_integral=float(psi_integral),
        drops=drops, drop_fraction=float(drop_fraction),
        flagged=bool(drop_fraction > 0.01),
    )


# ---------------------------------------------------------------------------
# the counting bridge: caps on the sphere vs cones after the flow


@dataclass(frozen=True, eq=False)
class BridgeCheck:
    sigma: float
    eps: float
    c: float
    T: float
    d: int
    t: float
    theta: float
    samples: int
    seed: int
    centers: np.ndarray
    cap_counts: np.ndarray
    cone_counts: np.ndarray

    @property
    def violations(self):
        return int((self.cap_counts > self.cone_counts).sum())

    @property
    def min_margin(self):
        return int((self.cone_counts - self.cap_counts).min())


def bridge_check(xi, sigma, eps, T, samples, seed, *, c=0.0, m0=None,
                 workers=-1, budget=DEFAULT_POINT_BUDGET):
    """Check that cap counts are dominated by cone counts after the flow.

    For each sampled direction on the upper hemisphere, the number of
    shell points whose direction falls in the shrinking cap is compared
    with the number of affine lattice points landing in the widened cone
    after rotating the cap center to the first axis and applying the
    expanding flow with e^{(d-1)t/d} = T (so the contracting entry is
    exactly 1/T and the image of the shell fits the unit cone).
    """
    xi_f, _ = as_xi(xi)
    d = xi_f.shape[0]
    if sigma <= 0 or eps < 0:
        raise ConfigError(f"need sigma > 0 and eps >= 0, got {sigma}, {eps}")
    m0 = np.eye(d) if m0 is None else np.asarray(m0, dtype=float)
    lattice = AffineLattice(m0, xi_f)
    shell = ShellSpec(c, T)
    points = enumerate_shell(lattice, shell, budget=budget).without_origin()
    dirs = directions_of(points)
    theta = cap_radius(sigma, c, T, d)
    t = d * log(T) / (d - 1)
    flow = expanding_flow(t, d)
    cone = ConeSpec(d, sigma + eps, 0.0)

    rng = rng_for(seed)
    centers = sample_directions(rng, samples, d, measure="hemisphere")
    cap_counts = count_in_caps(dirs, centers, theta, workers=workers)
    cone_counts = np.empty(samples, dtype=np.int64)
    for i in range(samples):
        mat = m0 @ rotate_to_e1(centers[i]) @ flow
        g = AffineGroupElement(mat, xi_f @ mat)
        cone_counts[i] = cone_count(g, cone)
    return BridgeCheck(
        sigma=float(sigma), eps=float(eps), c=float(c), T=float(T), d=d,
        t=float(t), theta=float(theta), samples=samples, seed=seed,
        centers=centers, cap_counts=cap_counts, cone_counts=cone_counts,
    )
