from math import log, sqrt

import numpy as np
import pytest

from affdirs.constants import dimension_constants
from affdirs.errors import ConfigError
from affdirs.experiments import (
    bridge_check,
    cap_count_run,
    empirical_limit_distribution,
    empirical_moment,
    escape_scan,
    moment_hypothesis,
    rng_for,
    sample_directions,
    siegel_mc_check_d2,
)
from affdirs.lattice_enum import AffineLattice, ShellSpec
from affdirs.sphere_stats import cap_radius

SQRT_PAIR = "sqrt2-1,sqrt3-1"
SQRT_TRIPLE = [np.sqrt(2) - 1, np.sqrt(3) - 1, np.sqrt(5) - 2]


def quadratic_lattice(d=2):
    shift = SQRT_TRIPLE[:d]
    return AffineLattice.integer(d, shift)


# ---------------------------------------------------------------------------
# randomness plumbing


def test_rng_for_repeatable():
    a = rng_for(42).random(5)
    b = rng_for(42).random(5)
    c = rng_for(43).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert type(rng_for(0).bit_generator).__name__ == "Philox"


def test_sample_directions_measures():
    rng = rng_for(1)
    u = sample_directions(rng, 20000, 3)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-12)
    assert np.abs(u.mean(axis=0)).max() < 0.02
    h = sample_directions(rng_for(2), 20000, 3, measure="hemisphere")
    assert np.all(h[:, 0] >= 0.0)
    # first coordinate of a uniform d=3 direction is uniform on [-1, 1]
    assert h[:, 0].mean() == pytest.approx(0.5, abs=0.01)
    c = sample_directions(
        rng_for(3), 20000, 3, measure="custom",
        density=lambda v: 1.0 + v[:, 0], density_bound=2.0,
    )
    # reweighted mean of the first coordinate is E[x^2] = 1/3
    assert c[:, 0].mean() == pytest.approx(1.0 / 3.0, abs=0.015)


def test_sample_directions_guards():
    rng = rng_for(0)
    with pytest.raises(ConfigError):
        sample_directions(rng, 0, 3)
    with pytest.raises(ConfigError):
        sample_directions(rng, 5, 3, measure="custom")
    with pytest.raises(ConfigError):
        sample_directions(rng, 5, 3, measure="custom",
                          density=lambda v: np.ones(len(v)), density_bound=0.0)
    with pytest.raises(ConfigError):
        sample_directions(rng, 5, 3, measure="area")


# ---------------------------------------------------------------------------
# cap-count runs


@pytest.fixture(scope="module")
def small_run():
    return cap_count_run(quadratic_lattice(), ShellSpec(0.0, 300.0),
                         (0.5, 1.0, 2.0), 2000, 7)


def test_cap_count_run_means_hit_target_density(small_run):
    for j, sigma in enumerate(small_run.sigmas):
        mean, se = small_run.mean(j)
        assert abs(mean - sigma) <= 3.0 * se
    assert small_run.counts.shape == (3, 2000)
    assert small_run.thetas[0] == pytest.approx(
        cap_radius(0.5, 0.0, 300.0, 2))


def test_cap_count_run_statistics_match_raw_counts(small_run):
    j = small_run.index_of(2.0)
    col = small_run.counts[j].astype(float)
    mean, se = small_run.mean(j)
    assert mean == pytest.approx(col.mean())
    assert se == pytest.approx(col.std(ddof=1) / sqrt(2000))
    pm, pse = small_run.product_moment(0, 2)
    prod = small_run.counts[0].astype(float) * small_run.counts[2]
    assert pm == pytest.approx(prod.mean())
    assert pse == pytest.approx(prod.std(ddof=1) / sqrt(2000))
    with pytest.raises(ConfigError):
        small_run.index_of(7.0)


def test_cap_count_run_worker_independence():
    lat = quadratic_lattice()
    a = cap_count_run(lat, ShellSpec(0.0, 120.0), (1.0,), 300, 5, workers=1)
    b = cap_count_run(lat, ShellSpec(0.0, 120.0), (1.0,), 300, 5, workers=-1)
    np.testing.assert_array_equal(a.counts, b.counts)
    np.testing.assert_array_equal(a.centers, b.centers)


def test_cap_count_run_guards():
    lat = quadratic_lattice()
    with pytest.raises(ConfigError):
        cap_count_run(lat, ShellSpec(0.0, 50.0), (), 10, 0)
    with pytest.raises(ConfigError):
        cap_count_run(lat, ShellSpec(0.0, 50.0), (1.0, -2.0), 10, 0)


# ---------------------------------------------------------------------------
# moments of the count vector


def test_moment_hypothesis_regimes():
    assert moment_hypothesis(3, (1.0, 1.0)) == ("A1", 2.0)
    assert moment_hypothesis(3, (2.0, 1.5)) == ("A2", 3.5)
    assert moment_hypothesis(3, (2.0, 2.5)) == (None, 4.5)
    assert moment_hypothesis(2, (1.5,)) == ("A1", 1.5)
    assert moment_hypothesis(2, (2.5,)) == ("A2", 2.5)
    # negative real parts do not contribute to the growth budget
    assert moment_hypothesis(3, (1 + 5j, -3.0)) == ("A1", 1.0)


def test_empirical_moment_matches_direct_formula(small_run):
    est = empirical_moment(small_run, (1.0, 0.0, 0.0))
    direct = (1.0 + small_run.counts[0]).astype(float)
    assert est.value == pytest.approx(complex(direct.mean()))
    assert est.se == pytest.approx(direct.std(ddof=1) / sqrt(2000), rel=1e-9)
    assert est.regime == "A1"
    # a purely imaginary exponent: modulus-one integrand
    est = empirical_moment(small_run, (1j, 0.0, 0.0))
    want = np.exp(1j * np.log1p(small_run.counts[0].astype(float)))
    assert est.value == pytest.approx(complex(want.mean()), rel=1e-12)
    assert abs(est.value) <= 1.0


def test_empirical_moment_divergent_regime_guard(small_run):
    with pytest.raises(ConfigError):
        empirical_moment(small_run, (1.5, 1.5, 0.5))  # eta = 3.5 >= d+1 = 3
    est = empirical_moment(small_run, (1.5, 1.5, 0.5), force=True)
    assert est.regime is None and est.eta == 3.5


def test_empirical_moment_truncation_monotone(small_run):
    full = empirical_moment(small_run, (1.0, 1.0, 0.0))
    assert full.restricted_value is None
    previous = -np.inf
    for K in (0, 1, 2, 4, 8, 64):
        est = empirical_moment(small_run, (1.0, 1.0, 0.0), K=K)
        val = est.restricted_value.real
        assert val >= previous - 1e-12
        assert val <= full.value.real + 1e-12
        previous = val
    # by K = 64 every sample is kept
    assert previous == pytest.approx(full.value.real, rel=1e-12)
    with pytest.raises(ConfigError):
        empirical_moment(small_run, (1.0, 1.0, 0.0), K=-2)


def test_empirical_moment_se_scales_like_root_samples():
    lat = quadratic_lattice()
    a = cap_count_run(lat, ShellSpec(0.0, 200.0), (1.0,), 1000, 21)
    b = cap_count_run(lat, ShellSpec(0.0, 200.0), (1.0,), 4000, 22)
    ra = empirical_moment(a, (1.0,)).se
    rb = empirical_moment(b, (1.0,)).se
    assert 1.6 <= ra / rb <= 2.5


# ---------------------------------------------------------------------------
# empirical limit law


def test_limit_distribution_consistency(small_run):
    dist = empirical_limit_distribution(small_run)
    joint = dist.joint()
    assert sum(joint.values()) == small_run.samples
    assert all(len(k) == 3 for k in joint)
    values, p, se = dist.marginal(1)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(se >= 0.0)
    mean, mse = dist.marginal_mean(1)
    assert mean == pytest.approx(small_run.mean(1)[0])
    assert dist.tail_mass(0) == 1.0
    r0 = 3
    assert dist.tail_mass(r0, j=1) <= dist.tail_mass(r0) + 1e-15
    # explicit recount of the tail
    want = float((small_run.counts[1] >= r0).mean())
    assert dist.tail_mass(r0, j=1) == pytest.approx(want)


def test_limit_distribution_tail_separates_shift_quality():
    # at d=3 a rational shift funnels many directions into few caps while a
    # generic quadratic shift spreads them; the heavy tail flips accordingly
    rational = cap_count_run(AffineLattice.integer(3, [0.0, 0.0, 0.0]),
                             ShellSpec(0.0, 25.0), (2.0,), 20000, 1)
    generic = cap_count_run(AffineLattice.integer(3, SQRT_TRIPLE),
                            ShellSpec(0.0, 25.0), (2.0,), 20000, 1)
    tail_rat = empirical_limit_distribution(rational).tail_mass(8)
    tail_gen = empirical_limit_distribution(generic).tail_mass(8)
    assert tail_rat >= 0.003
    assert tail_gen <= 0.002
    assert tail_rat >= 2.0 * tail_gen


# ---------------------------------------------------------------------------
# mean-value Monte Carlo at d=2


def test_siegel_mc_matches_exact_means():
    mv = siegel_mc_check_d2(1.0, 1.0, 20000, 11)
    assert mv.offdiag_expected == 1.0
    assert mv.diagonal_expected == 1.0
    assert abs(mv.offdiag_z) <= 3.0
    assert abs(mv.diagonal_z) <= 3.0
    # acceptance rate of the fundamental-domain rejection sampler
    assert mv.acceptance_rate == pytest.approx(np.pi * sqrt(3.0) / 6.0,
                                               abs=0.02)
    asym = siegel_mc_check_d2(2.0, 0.5, 20000, 13)
    assert asym.offdiag_expected == 1.0
    assert asym.diagonal_expected == 0.5
    assert abs(asym.offdiag_z) <= 3.0
    assert abs(asym.diagonal_z) <= 3.0
    # per-cone count means track the cone volumes
    for mean, se, sigma in zip(asym.count_means, asym.count_ses, (2.0, 0.5)):
        assert abs(mean - sigma) <= 3.0 * se


def test_siegel_mc_guards():
    with pytest.raises(ConfigError):
        siegel_mc_check_d2(0.0, 1.0, 100, 0)
    with pytest.raises(ConfigError):
        siegel_mc_check_d2(1.0, 1.0, 1, 0)


# ---------------------------------------------------------------------------
# escape of mass


def test_escape_scan_threshold_profile():
    scan = escape_scan(SQRT_PAIR, (5.0, 10.0, 15.0),
                       (1.0, 8.0, 64.0, 512.0, 4096.0),
                       eta=2.5, psi="constant", samples=500, seed=0)
    # at R = 1 the functional is identically one and the weight integrates
    # to 2; all mass is gone by R = 8 at these flow times
    np.testing.assert_array_equal(scan.estimates[:, 0], 2.0)
    np.testing.assert_array_equal(scan.estimates[:, 1:], 0.0)
    assert not scan.flagged and scan.drops == 0
    assert scan.r == dimension_constants(2).delta_d
    np.testing.assert_array_equal(scan.max_over_t(), scan.estimates.max(axis=0))
    # pointwise nonincreasing in R
    assert np.all(np.diff(scan.estimates, axis=1) <= 1e-12)


def test_escape_scan_bump_weight():
    scan = escape_scan(SQRT_PAIR, (5.0,), (1.0, 8.0), eta=2.5, psi="bump",
                       samples=400, seed=0)
    # with every profile equal to one the estimate is the weight integral
    assert scan.psi_integral == pytest.approx(0.44399381616807865, rel=1e-9)
    assert scan.estimates[0, 0] == pytest.approx(scan.psi_integral, rel=1e-12)
    assert scan.estimates[0, 1] == 0.0


def test_escape_scan_guards():
    with pytest.raises(ConfigError):
        escape_scan(SQRT_PAIR, (5.0,), (1.0,), eta=0.0)
    with pytest.raises(ConfigError):
        escape_scan(SQRT_PAIR, (5.0,), (0.5,), eta=2.5)
    with pytest.raises(ConfigError):
        escape_scan(SQRT_PAIR, (5.0,), (1.0,), eta=2.5, r=1.0)  # below floor
    with pytest.raises(ConfigError):
        escape_scan(SQRT_PAIR, (5.0,), (1.0,), eta=2.5, psi="tent")


# ---------------------------------------------------------------------------
# cap counts vs cone counts after the flow


def test_bridge_small_runs_have_no_violations():
    res = bridge_check(SQRT_PAIR, 1.0, 0.5, 50.0, 200, 3)
    assert res.violations == 0
    assert res.min_margin >= 0
    assert res.t == pytest.approx(2.0 * log(50.0))
    assert res.theta == pytest.approx(cap_radius(1.0, 0.0, 50.0, 2))
    res3 = bridge_check(SQRT_TRIPLE, 1.0, 0.5, 12.0, 100, 4)
    assert res3.violations == 0
    assert res3.d == 3
    assert res3.t == pytest.approx(3.0 * log(12.0) / 2.0)


def test_bridge_inner_cut_and_zero_margin():
    res = bridge_check(SQRT_PAIR, 1.0, 0.5, 50.0, 150, 6, c=0.5)
    assert res.violations == 0
    # a zero widening margin is reported, not an error
    tight = bridge_check(SQRT_PAIR, 1.0, 0.0, 30.0, 50, 7)
    assert tight.eps == 0.0
    assert tight.violations >= 0
    assert tight.cap_counts.shape == (50,)


def test_bridge_guards():
    with pytest.raises(ConfigError):
        bridge_check(SQRT_PAIR, 0.0, 0.5, 50.0, 10, 0)
    with pytest.raises(ConfigError):
        bridge_check(SQRT_PAIR, 1.0, -0.1, 50.0, 10, 0)
