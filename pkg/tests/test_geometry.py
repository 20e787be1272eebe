import numpy as np
import pytest
import scipy.linalg

from affdirs.constants import dimension_constants
from affdirs.errors import ConfigError
from affdirs.geometry import (
    AffineGroupElement,
    cone_count,
    cone_counts,
    escape_mass,
    escape_mass_profile,
    expanding_flow,
    horospherical_shear,
    identity,
    inverse,
    iwasawa,
    lattice_of,
    multiply,
    reduced_count_bound,
    rotate_to_e1,
    siegel_ratio_bound,
    siegel_reduce,
    tall_count,
    tangent_coordinates,
)
from affdirs.lattice_enum import ConeSpec, ShellSpec, enumerate_shell


def random_sl(rng, d):
    """Determinant-one matrix, moderately conditioned."""
    while True:
        A = rng.standard_normal((d, d))
        det = np.linalg.det(A)
        if abs(det) < 1e-6:
            continue
        if det < 0:
            A[0] = -A[0]
        A = A / abs(det) ** (1.0 / d)
        if np.linalg.cond(A) < 1e4:
            return A


def random_unimodular(rng, d, spread=4):
    U = np.eye(d, dtype=int)
    for _ in range(6):
        i, j = rng.choice(d, 2, replace=False)
        S = np.eye(d, dtype=int)
        S[i, j] = int(rng.integers(-spread, spread + 1))
        U = U @ S
    return U


# ---------------------------------------------------------------------------
# group plumbing


def test_group_laws_and_action():
    rng = np.random.default_rng(1)
    for d in (2, 3):
        g = AffineGroupElement(random_sl(rng, d), rng.uniform(-1, 1, d))
        h = AffineGroupElement(random_sl(rng, d), rng.uniform(-1, 1, d))
        x = rng.uniform(-2, 2, (5, d))
        # action: x -> x M + b, and (x g) h == x (g h)
        np.testing.assert_allclose(g.apply(x), x @ g.matrix + g.shift, atol=1e-12)
        np.testing.assert_allclose(h.apply(g.apply(x)), multiply(g, h).apply(x),
                                   atol=1e-10)
        gid = multiply(g, inverse(g))
        np.testing.assert_allclose(gid.matrix, np.eye(d), atol=1e-10)
        np.testing.assert_allclose(gid.shift, 0.0, atol=1e-10)
        e = identity(d)
        np.testing.assert_allclose(multiply(e, g).matrix, g.matrix, atol=1e-14)


def test_expanding_flow_and_shear():
    for d in (2, 3, 4):
        t = 1.7
        F = expanding_flow(t, d)
        assert np.linalg.det(F) == pytest.approx(1.0, rel=1e-12)
        assert F[0, 0] == pytest.approx(np.exp(-(d - 1) * t / d))
        assert F[1, 1] == pytest.approx(np.exp(t / d))
    y = np.array([0.3, -0.8])
    S = horospherical_shear(y)
    assert S.shape == (3, 3)
    np.testing.assert_allclose(S[0], [1.0, 0.3, -0.8])
    np.testing.assert_allclose(S @ horospherical_shear(-y), np.eye(3), atol=1e-15)


# ---------------------------------------------------------------------------
# Iwasawa factorisation


def test_iwasawa_reconstruction_bulk():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(2, 5))
        M = random_sl(rng, d)
        co = iwasawa(M)
        assert np.all(co.v > 0.0)
        assert abs(float(np.prod(co.v)) - 1.0) <= 1e-9
        np.testing.assert_allclose(co.k @ co.k.T, np.eye(d), atol=1e-12)
        assert np.linalg.det(co.k) == pytest.approx(1.0, rel=1e-9)
        err = np.linalg.norm(co.reconstruct() - M)
        worst = max(worst, err)
    assert worst <= 1e-9


def test_iwasawa_rejects_bad_input():
    with pytest.raises(ConfigError):
        iwasawa(np.diag([2.0, 1.0]))
    with pytest.raises(ConfigError):
        iwasawa(np.zeros((2, 3)))


# ---------------------------------------------------------------------------
# sphere rotations


def test_rotation_sends_direction_to_e1():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(10000):
        d = int(rng.integers(2, 5))
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        if v[0] <= -1.0 + 1e-5:
            # accuracy degrades like 1/(1 + v[0]) at the antipode; checked
            # separately below with a tolerance matching the conditioning
            K = rotate_to_e1(v)
            assert np.linalg.norm(v @ K - np.eye(d)[0]) <= 1e-8
            continue
        K = rotate_to_e1(v)
        e1 = np.zeros(d)
        e1[0] = 1.0
        worst = max(worst, float(np.linalg.norm(v @ K - e1)))
        np.testing.assert_allclose(K @ K.T, np.eye(d), atol=1e-12)
        assert np.linalg.det(K) == pytest.approx(1.0, rel=1e-10)
    assert worst <= 1e-10


def test_rotation_is_exponential_of_tangent_generator():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        if v[0] <= 0.0:
            v[0] = -v[0]
        y = tangent_coordinates(v)
        gen = np.zeros((d, d))
        gen[0, 1:] = -y
        gen[1:, 0] = y
        np.testing.assert_allclose(rotate_to_e1(v), scipy.linalg.expm(gen),
                                   atol=1e-10)


def test_rotation_special_points():
    e1 = np.array([1.0, 0.0])
    np.testing.assert_allclose(rotate_to_e1(e1), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(rotate_to_e1(np.array([0.0, 1.0])),
                               [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)
    with pytest.raises(ConfigError):
        rotate_to_e1(np.array([-1.0, 0.0]))
    with pytest.raises(ConfigError):
        rotate_to_e1(np.array([0.5, 0.5]))  # not unit
    assert np.linalg.norm(tangent_coordinates(np.array([0.0, 1.0, 0.0]))) == \
        pytest.approx(np.pi / 2)


# ---------------------------------------------------------------------------
# reduced coordinates


def test_reduced_coordinates_invariant_under_integer_subgroup():
    rng = np.random.default_rng(5)
    for trial in range(100):
        d = int(rng.integers(2, 4))
        g = AffineGroupElement(random_sl(rng, d), rng.uniform(-0.5, 0.5, d))
        gamma = random_unimodular(rng, d)
        if int(round(np.linalg.det(gamma.astype(float)))) != 1:
            gamma[0] = -gamma[0]
        shift_m = rng.integers(-3, 4, d).astype(float)
        moved = AffineGroupElement(gamma.astype(float) @ g.matrix,
                                   shift_m @ g.matrix + g.shift)
        a = siegel_reduce(g)
        b = siegel_reduce(moved)
        np.testing.assert_allclose(a.v, b.v, rtol=1e-8)
        np.testing.assert_allclose(np.sort(np.abs(a.b)), np.sort(np.abs(b.b)),
                                   atol=1e-6)
        # the functional built from them agrees as well
        for R, eta, r in ((1.0, 2.5, None), (8.0, 2.5, None)):
            r = dimension_constants(d).delta_d
            assert escape_mass(g, R, eta, r) == \
                pytest.approx(escape_mass(moved, R, eta, r), rel=1e-8, abs=1e-12)


def test_reduced_profile_shape():
    rng = np.random.default_rng(6)
    for _ in range(60):
        d = int(rng.integers(2, 5))
        g = AffineGroupElement(random_sl(rng, d), rng.uniform(-0.5, 0.5, d))
        co = siegel_reduce(g)
        # representative reproduces the orbit: gamma is unimodular and the
        # element maps back onto the original lattice
        assert abs(round(np.linalg.det(co.gamma.astype(float)))) == 1
        assert float(np.prod(co.v)) == pytest.approx(1.0, abs=1e-9)
        assert np.all(co.b >= -0.5) and np.all(co.b < 0.5)
        ratios = co.v[1:] / co.v[:-1]
        assert np.all(ratios <= siegel_ratio_bound(d) + 1e-9)
        # reduced matrix spans the same point set
        orig = lattice_of(g)
        red = lattice_of(co.element())
        s1 = enumerate_shell(orig, ShellSpec(0.0, 2.5))
        s2 = enumerate_shell(red, ShellSpec(0.0, 2.5))
        assert len(s1) == len(s2)
        np.testing.assert_allclose(s1.norms, s2.norms, atol=1e-8)


def test_reduction_idempotent_on_representative():
    rng = np.random.default_rng(7)
    for _ in range(30):
        d = int(rng.integers(2, 4))
        g = AffineGroupElement(random_sl(rng, d), rng.uniform(-0.5, 0.5, d))
        co = siegel_reduce(g)
        again = siegel_reduce(co.element())
        np.testing.assert_allclose(co.v, again.v, rtol=1e-9)


def test_tall_count_hand_cases():
    cst = dimension_constants(3)
    thr = 2.0 * cst.cd_siegel  # r = 1
    v = np.array([thr * 4.0, thr * 2.0, 1.0 / (thr * 4.0 * thr * 2.0)])
    assert tall_count(v, 1.0) == 2
    v = np.array([thr * 4.0, 0.5, 1.0])
    assert tall_count(v, 1.0) == 1
    assert tall_count(np.array([0.5, 0.5, 4.0]), 1.0) == 0
    # the last coordinate never counts
    v = np.array([0.5, 0.5, thr * 9.0])
    assert tall_count(v, 1.0) == 0


def test_escape_functional_profile_cases():
    # no tall coordinates: empty product, indicator of 1 >= R
    assert escape_mass_profile([0.5, 2.0], [0.1, 0.1], 1.0, 2.5, 1.0) == 1.0
    assert escape_mass_profile([0.5, 2.0], [0.1, 0.1], 4.0, 2.5, 1.0) == 0.0
    # one tall coordinate at d=2
    cst = dimension_constants(2)
    v1 = 4.0 * cst.cd_siegel  # above the 2 * cd * r threshold at r = 1
    v = [v1, 1.0 / v1]
    band = cst.cd_siegel * 1.0
    inside = band / v1 * 0.5
    outside = band / v1 * 2.0
    assert escape_mass_profile(v, [inside, 0.0], 1.0, 2.5, 1.0) == \
        pytest.approx(v1 ** 2.5)
    assert escape_mass_profile(v, [outside, 0.0], 1.0, 2.5, 1.0) == 0.0
    # threshold R cuts the product
    assert escape_mass_profile(v, [inside, 0.0], v1 * 1.01, 2.5, 1.0) == 0.0
    with pytest.raises(ConfigError):
        escape_mass_profile(v, [0.0, 0.0], 0.5, 2.5, 1.0)


def test_count_bound_at_identity():
    for d in (2, 3):
        cst = dimension_constants(d)
        g = identity(d)
        for eta in (1.0, 2.5):
            want = (cst.C_d * cst.delta_d ** d) ** eta
            assert reduced_count_bound(g, cst.delta_d, eta) == \
                pytest.approx(want, rel=1e-12)


def test_count_bound_matches_public_coordinates():
    # reimplement the envelope from the published reduced coordinates and
    # check the interval factors only ever contribute 0 or 1
    rng = np.random.default_rng(8)
    for _ in range(80):
        d = int(rng.integers(2, 4))
        g = AffineGroupElement(random_sl(rng, d), rng.uniform(-0.5, 0.5, d))
        radius = float(rng.uniform(0.3, 3.0))
        eta = float(rng.uniform(0.5, 3.0))
        cst = dimension_constants(d)
        co = siegel_reduce(g)
        r = max(cst.delta_d, radius)
        s = tall_count(co.v, r)
        expect = (cst.C_d * r ** d) ** eta
        for i in range(s):
            lo = -cst.cd_siegel * r / co.v[i] - co.b[i]
            hi = cst.cd_siegel * r / co.v[i] - co.b[i]
            n_in = max(0, int(np.floor(hi)) - int(np.ceil(lo)) + 1)
            assert n_in in (0, 1)
            expect *= co.v[i] ** eta * n_in
        assert reduced_count_bound(g, radius, eta) == pytest.approx(expect)


def test_count_bound_dominates_cone_counts():
    rng = np.random.default_rng(9)
    checked = 0
    for _ in range(200):
        d = int(rng.integers(2, 4))
        g = AffineGroupElement(random_sl(rng, d), rng.uniform(-0.5, 0.5, d))
        cone = ConeSpec(d, float(rng.uniform(0.4, 2.0)), float(rng.uniform(0.0, 0.7)))
        eta = float(rng.uniform(0.5, 3.0))
        n = cone_count(g, cone)
        assert float(n) ** eta <= reduced_count_bound(g, cone, eta) * (1.0 + 1e-9)
        checked += 1
    assert checked == 200


def test_mixed_product_dominated_by_union_count():
    # |prod N_j^{z_j}| <= N(union)^{sum z} for nonnegative exponents;
    # cones with a common inner cut are nested, so the union is the widest
    rng = np.random.default_rng(10)
    for _ in range(60):
        d = int(rng.integers(2, 4))
        g = AffineGroupElement(random_sl(rng, d), rng.uniform(-0.5, 0.5, d))
        c = float(rng.uniform(0.0, 0.5))
        sigmas = np.sort(rng.uniform(0.3, 2.0, int(rng.integers(2, 4))))
        zs = rng.uniform(0.2, 1.5, sigmas.shape[0])
        cones = [ConeSpec(d, float(s), c) for s in sigmas]
        counts = cone_counts(g, cones)
        prod = float(np.prod([n ** z for n, z in zip(counts, zs)]))
        union = float(counts[-1])  # widest cone contains the others
        assert prod <= union ** zs.sum() * (1.0 + 1e-9) + 1e-12



def test_nested_cone_counts_monotone():
    rng = np.random.default_rng(11)
    g = AffineGroupElement(random_sl(rng, 2), rng.uniform(-0.5, 0.5, 2))
    cones = [ConeSpec(2, s, 0.1) for s in (0.5, 1.0, 1.5, 2.0)]
    counts = cone_counts(g, cones)
    assert all(a <= b for a, b in zip(counts, counts[1:]))
