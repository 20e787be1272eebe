"""Diophantine diagnostics for the lattice shift.

The central quantity is ``zeta(xi, T)``: the smallest sup-norm box of
integer vectors m for which some ``xi . m`` comes within 1/T of an
integer.  It is computed by a brute shell-by-shell scan (no
continued-fraction shortcuts), with a point budget guard; the pigeonhole
bound says the scan never needs to pass ``ceil(T**(1/d))``.

Shifts may be given as exact literals -- rationals p/q or single surds
``(a + b sqrt(n))/c`` -- in which case near-resonances found in floating
point are re-decided exactly.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, isqrt, log, sqrt

import numpy as np

from .errors import BudgetError, ConfigError, NumericError

DEFAULT_SCAN_BUDGET = 1e9
_NEAR_RESONANCE = 1e-12
_SURD_DIGITS = 60


@dataclass(frozen=True)
class SurdValue:
    """Exact number ``a + b * sqrt(n)`` with rational a, b and integer n >= 0.

    Square factors of n are folded into b at construction, so n is either
    0 (rational value) or a non-square.
    """

    a: Fraction
    b: Fraction = Fraction(0)
    n: int = 0

    def __post_init__(self):
        a, b, n = Fraction(self.a), Fraction(self.b), int(self.n)
        if n < 0:
            raise ConfigError(f"sqrt argument must be nonnegative, got {n}")
        if n > 0:
            # pull out the largest square divisor
            root = isqrt(n)
            if root * root == n:
                a, b, n = a + b * root, Fraction(0), 0
            else:
                for k in range(root, 1, -1):
                    if n % (k * k) == 0:
                        b, n = b * k, n // (k * k)
                        break
        if b == 0:
            n = 0
        if n == 0:
            b = Fraction(0)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n", n)

    @property
    def is_rational(self):
        return self.n == 0

    def __float__(self):
        return float(self.a) + float(self.b) * sqrt(self.n)

    def __str__(self):
        if self.is_rational:
            return str(self.a)
        return f"{self.a}+{self.b}*sqrt({self.n})"


def _sqrt_fraction(n, digits=_SURD_DIGITS):
    scale = 10 ** digits
    return Fraction(isqrt(n * scale * scale), scale)


def _exact_combination(coords, m):
    """rational part and irrational coefficients of ``sum m_i coords_i``."""
    rational = Fraction(0)
    irrational = {}
    for mi, c in zip(m, coords):
        mi = int(mi)
        if mi == 0:
            continue
        rational += mi * c.a
        if c.n:
            irrational[c.n] = irrational.get(c.n, Fraction(0)) + mi * c.b
    return rational, {n: q for n, q in irrational.items() if q != 0}


def _exact_frac_dist(coords, m):
    """Distance of ``sum m_i coords_i`` to the nearest integer, as a Fraction.

    Exactly zero iff the combination is a genuine integer resonance;
    otherwise accurate to ~10**-{digits} via high-precision square roots.
    """
    rational, irrational = _exact_combination(coords, m)
    if not irrational:
        dist = rational - round(rational)
        return abs(dist)
    value = rational
    for n, q in irrational.items():
        value += q * _sqrt_fraction(n)
    return abs(value - round(value))


_TERM_RE = re.compile(
    r"^([+-]?)(\d+(?:\.\d+)?|\.\d+)?(?:\*?sqrt(\d+))?(?:/(\d+))?$"
)


def _parse_coordinate(text):
    token = text.replace(" ", "")
    denom = Fraction(1)
    outer = re.fullmatch(r"\((.+)\)/(\d+)", token)
    if outer:
        token, denom = outer.group(1), Fraction(int(outer.group(2)))
        if denom == 0:
            raise ConfigError(f"zero denominator in {text!r}")
    terms = re.findall(r"[+-]?[^+-]+", token)
    if not terms or "".join(terms) != token:
        raise ConfigError(f"cannot parse coordinate {text!r}")
    a = Fraction(0)
    b = Fraction(0)
    n_seen = 0
    for term in terms:
        match = _TERM_RE.match(term)
        if not match or (match.group(2) is None and match.group(3) is None):
            raise ConfigError(f"cannot parse term {term!r} in {text!r}")
        sign = -1 if match.group(1) == "-" else 1
        coeff = Fraction(match.group(2)) if match.group(2) else Fraction(1)
        if match.group(4):
            if int(match.group(4)) == 0:
                raise ConfigError(f"zero denominator in term {term!r}")
            coeff /= int(match.group(4))
        coeff *= sign
        if match.group(3) is None:
            a += coeff
        else:
            n = int(match.group(3))
            probe = SurdValue(Fraction(0), coeff, n)
            if probe.is_rational:
                a += probe.a
            else:
                if n_seen and probe.n != n_seen:
                    raise ConfigError(
                        f"at most one distinct surd per coordinate ({text!r})"
                    )
                n_seen = probe.n
                b += probe.b
    return SurdValue(a / denom, b / denom, n_seen)


def parse_xi(text):
    """Parse a comma-separated shift literal into exact coordinates.

    Accepts decimal literals, rationals ``p/q``, and single-surd forms
    like ``sqrt2-1``, ``2sqrt3/5``, or ``(1+sqrt5)/2``.
    """
    tokens = [t for t in text.split(",")]
    if not tokens:
        raise ConfigError("empty shift literal")
    return tuple(_parse_coordinate(t) for t in tokens)


def as_xi(xi):
    """Normalise a shift to (float array, exact coordinates or None)."""
    if isinstance(xi, str):
        coords = parse_xi(xi)
        return np.array([float(c) for c in coords]), coords
    seq = list(xi)
    if seq and all(isinstance(c, SurdValue) for c in seq):
        return np.array([float(c) for c in seq]), tuple(seq)
    return np.array([float(c) for c in seq], dtype=float), None


def frac_dist(x):
    """Distance to the nearest integer, elementwise."""
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.round(x))


def box_shell(n, d):
    """Integer vectors with sup norm exactly n, each listed once."""
    if n < 1:
        raise ConfigError(f"shell index must be >= 1, got {n}")
    blocks = []
    for axis in range(d):
        for sign in (n, -n):
            axes = []
            for j in range(d):
                if j == axis:
                    axes.append(np.array([sign]))
                elif j < axis:
                    axes.append(np.arange(-n, n + 1))
                else:
                    axes.append(np.arange(-(n - 1), n))
            grid = np.meshgrid(*axes, indexing="ij")
            blocks.append(np.stack(grid, axis=-1).reshape(-1, d))
    return np.vstack(blocks)


def _shell_budget_ok(n, d, max_points):
    return (2 * n + 1) ** d <= max_points


def zeta(xi, T, *, max_points=DEFAULT_SCAN_BUDGET):
    """Smallest sup-norm radius N whose box brings ``xi . m`` within 1/T
    of an integer (for some nonzero m with sup norm <= N)."""
    xi_f, exact = as_xi(xi)
    d = xi_f.shape[0]
    if not (T > 0.0):
        raise ConfigError(f"T must be positive, got {T}")
    threshold = 1.0 / T
    pigeonhole = ceil(T ** (1.0 / d)) + 1
    n = 0
    while True:
        n += 1
        if not _shell_budget_ok(n, d, max_points):
            raise BudgetError(
                f"zeta scan for T={T} exceeded {max_points:.3g} points at "
                f"box radius {n}",
                bound_reached=n - 1,
            )
        if n > pigeonhole:
            raise NumericError(
                f"zeta scan passed the pigeonhole bound {pigeonhole} for T={T}"
            )
        m = box_shell(n, d)
        dist = frac_dist(m @ xi_f)
        hit = dist <= threshold
        near = dist <= threshold + _NEAR_RESONANCE
        if exact is not None and near.any():
            thr = Fraction(1) / Fraction(T)
            for row in m[near]:
                if _exact_frac_dist(exact, row) <= thr:
                    return n
        elif hit.any():
            return n


def dirichlet_bound(T, d):
    """Pigeonhole upper bound for zeta: ``ceil(T ** (1/d))``."""
    return ceil(T ** (1.0 / d))


@dataclass(frozen=True, eq=False)
class VaguelyDiophantineSum:
    """Partial sums of ``l**rho * 2**(mu l) * zeta(xi, 2**(l-1))**(-nu)``."""

    rho: float
    mu: float
    nu: float
    l: np.ndarray
    zetas: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray
    l_requested: int
    budget_exhausted: bool

    @property
    def l_completed(self):
        return int(self.l[-1]) if self.l.size else 0


def vaguely_diophantine_partial(xi, rho, mu, nu, l_max,
                                *, max_points=DEFAULT_SCAN_BUDGET):
    """Term table for the vague-Diophantine series, up to the scan budget.

    If the zeta scan for some l would blow the point budget the table is
    truncated there and flagged; the partial sums are still meaningful as
    a convergence diagnostic.
    """
    if l_max < 1:
        raise ConfigError(f"l_max must be >= 1, got {l_max}")
    ls, zetas, terms = [], [], []
    exhausted = False
    for l in range(1, l_max + 1):
        try:
            z = zeta(xi, 2.0 ** (l - 1), max_points=max_points)
        except BudgetError:
            exhausted = True
            break
        ls.append(l)
        zetas.append(z)
        terms.append(l ** rho * 2.0 ** (mu * l) * float(z) ** (-nu))
    terms = np.array(terms)
    return VaguelyDiophantineSum(
        rho=rho, mu=mu, nu=nu,
        l=np.array(ls, dtype=int), zetas=np.array(zetas, dtype=int),
        terms=terms, partial_sums=np.cumsum(terms),
        l_requested=l_max, budget_exhausted=exhausted,
    )


@dataclass(frozen=True, eq=False)
class BrjunoSum:
    """Partial sums of ``2**(-j/s) * phi(2**j)`` with
    ``phi(N) = log 1/min_{0<|m|<=N} dist(xi . m, Z)``."""

    s: float
    n: np.ndarray
    phi: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray
    n_requested: int
    resonant: bool
    witness: tuple | None
    budget_exhausted: bool


def brjuno_partial(xi, s, n_max, *, max_points=DEFAULT_SCAN_BUDGET):
    """Brjuno-type partial sums over dyadic box sizes.

    An exact resonance (``xi . m`` integral) makes the series diverge;
    the witness m is reported and the verdict is final regardless of
    ``n_max``.
    """
    if s <= 0.0:
        raise ConfigError(f"s must be positive, got {s}")
    if n_max < 0:
        raise ConfigError(f"n_max must be >= 0, got {n_max}")
    xi_f, exact = as_xi(xi)
    d = xi_f.shape[0]
    best = np.inf  # running min of dist over all boxes scanned so far
    ns, phis = [], []
    resonant = False
    witness = None
    exhausted = False
    shell = 0
    for j in range(n_max + 1):
        radius = 2 ** j
        while shell < radius and not resonant:
            shell += 1
            if not _shell_budget_ok(shell, d, max_points):
                exhausted = True
                break
            m = box_shell(shell, d)
            dist = frac_dist(m @ xi_f)
            i_min = int(np.argmin(dist))
            candidate = float(dist[i_min])
            if candidate < _NEAR_RESONANCE:
                if exact is not None:
                    exact_d = _exact_frac_dist(exact, m[i_min])
                    if exact_d == 0:
                        resonant = True
                        witness = tuple(int(v) for v in m[i_min])
                    else:
                        candidate = max(float(exact_d), 5e-324)
                elif candidate == 0.0:
                    resonant = True
                    witness = tuple(int(v) for v in m[i_min])
            best = min(best, candidate)
        if exhausted:
            break
        ns.append(j)
        phis.append(np.inf if resonant else -log(best))
        if resonant:
            break
    phis = np.array(phis)
    ns = np.array(ns, dtype=int)
    terms = 2.0 ** (-ns / s) * phis
    return BrjunoSum(
        s=s, n=ns, phi=phis, terms=terms, partial_sums=np.cumsum(terms),
        n_requested=n_max, resonant=resonant, witness=witness,
        budget_exhausted=exhausted,
    )
