import io

import numpy as np
import pytest

from affdirs.constants import ball_volume, sphere_area
from affdirs.errors import BudgetError, ConfigError
from affdirs.lattice_enum import (
    AffineLattice,
    ConeSpec,
    ShellSpec,
    brute_force_shell,
    count_in_cone,
    enumerate_shell,
    expected_shell_count,
)


# Frozen against an independent full-box scan (plain double loop over
# integer vectors, no shared code with the package): count, extreme norms,
# and the sum of all norms of the shell.
FROZEN_SHELLS = [
    (np.eye(2), (0.0, 0.0), 0.0, 10.0,
     316, 1.0, 10.0, 2123.565498194),
    (np.eye(2), (0.5, 0.5), 0.5, 7.25,
     120, 3.807886552932, 7.106335201776, 679.444411960),
    (np.eye(3), (0.2, 0.4, 0.6), 0.0, 4.5,
     377, 0.6, 4.489988864129, 1267.219251689),
    ([[2.0, 1.0], [1.0, 1.0]], (0.3, 0.7), 0.25, 6.0,
     103, 1.640121946686, 5.990826320300, 427.191381977),
    (np.eye(4), (0.1, 0.2, 0.3, 0.4), 0.0, 3.5,
     738, 0.547722557505, 3.478505426185, 2064.977484357),
]


@pytest.mark.parametrize("matrix,shift,c,T,count,lo,hi,total", FROZEN_SHELLS)
def test_shell_matches_frozen_box_scan(matrix, shift, c, T, count, lo, hi, total):
    shell = enumerate_shell(AffineLattice(matrix, shift), ShellSpec(c, T))
    pts = shell.without_origin() if c == 0.0 else shell
    assert len(pts) == count
    assert pts.norms[0] == pytest.approx(lo, abs=1e-9)
    assert pts.norms[-1] == pytest.approx(hi, abs=1e-9)
    assert float(pts.norms.sum()) == pytest.approx(total, abs=1e-6)


def test_shell_matches_bruteforce_random_instances():
    rng = np.random.default_rng(20240817)
    for _ in range(40):
        d = int(rng.integers(2, 5))
        # random unimodular-ish matrix: integer shear products keep det = 1
        M = np.eye(d)
        for _ in range(3):
            i, j = rng.choice(d, 2, replace=False)
            S = np.eye(d)
            S[i, j] = float(rng.integers(-2, 3))
            M = M @ S
        xi = rng.uniform(-1.0, 1.0, d)
        c = float(rng.uniform(0.0, 0.8))
        T = float(rng.uniform(1.0, 3.0 if d == 4 else 5.0))
        lat = AffineLattice(M, xi)
        shell = ShellSpec(c, T)
        got = enumerate_shell(lat, shell)
        want = brute_force_shell(lat, shell, max_box_radius=40)
        assert got.m.shape == want.m.shape
        assert np.array_equal(got.m, want.m)
        np.testing.assert_allclose(got.norms, want.norms, atol=1e-12)


def test_empty_shell():
    lat = AffineLattice.integer(2, (0.5, 0.5))
    pts = enumerate_shell(lat, ShellSpec(0.0, 0.4))
    assert len(pts) == 0
    assert pts.m.shape == (0, 2)


def test_integral_shift_reproduces_unshifted_counts():
    plain = enumerate_shell(AffineLattice.integer(2), ShellSpec(0.0, 6.0))
    moved = enumerate_shell(AffineLattice.integer(2, (3.0, -2.0)), ShellSpec(0.0, 6.0))
    assert len(plain) == len(moved)
    np.testing.assert_allclose(plain.norms, moved.norms, atol=1e-12)
    # origin present in both; dropped consistently
    assert len(plain.without_origin()) == len(plain) - 1


def test_norm_sorted_with_lexicographic_ties():
    pts = enumerate_shell(AffineLattice.integer(2), ShellSpec(0.0, 5.0))
    assert np.all(np.diff(pts.norms) >= -1e-15)
    same = np.isclose(pts.norms[:-1], pts.norms[1:])
    for i in np.nonzero(same)[0]:
        assert tuple(pts.m[i]) < tuple(pts.m[i + 1])


def test_expected_count_asymptotics():
    # (1 - c^d)/d * area(S^{d-1}) * T^d, within 2% at moderate radius
    for d, T in ((2, 200.0), (3, 40.0)):
        lat = AffineLattice.integer(d, [0.3] * d)
        shell = ShellSpec(0.0, T)
        n = len(enumerate_shell(lat, shell))
        expect = expected_shell_count(shell, d)
        assert expect == pytest.approx(sphere_area(d) * T ** d / d, rel=1e-12)
        assert abs(n / expect - 1.0) < 0.02


def test_cone_volume_is_sigma():
    for d, sigma, c in ((2, 1.0, 0.0), (2, 2.5, 0.5), (3, 1.0, 0.0),
                        (3, 0.7, 0.25), (4, 1.2, 0.5)):
        cone = ConeSpec(d, sigma, c)
        assert cone.volume == pytest.approx(sigma, rel=1e-12)
        assert cone.volume_quadrature() == pytest.approx(sigma, rel=1e-6)


def test_cone_membership_and_bounding_radius():
    cone = ConeSpec(3, 1.0, 0.25)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.5, 1.5, (4000, 3))
    inside = cone.contains(pts)
    # axis slab bounds
    assert np.all(pts[inside, 0] > 0.25)
    assert np.all(pts[inside, 0] <= 1.0)
    lat = np.linalg.norm(pts[inside, 1:], axis=1)
    assert np.all(lat < cone.slope * pts[inside, 0])
    norms = np.linalg.norm(pts[inside], axis=1)
    if norms.size:
        assert norms.max() <= cone.bounding_radius + 1e-12
    # Monte Carlo volume agrees with the exact one
    vol = inside.mean() * 3.0 ** 3
    assert vol == pytest.approx(cone.volume, rel=0.15)


def test_cone_count_matches_direct_filter():
    lat = AffineLattice.integer(2, (0.41, 0.73))
    cone = ConeSpec(2, 0.9, 0.2)
    # direct: enumerate a ball that certainly covers the cone, filter
    ball = enumerate_shell(lat, ShellSpec(0.0, cone.bounding_radius + 0.5))
    direct = int(cone.contains(ball.points).sum())
    assert count_in_cone(lat, cone) == direct


def test_shell_budget_error():
    lat = AffineLattice.integer(2)
    with pytest.raises(BudgetError) as info:
        enumerate_shell(lat, ShellSpec(0.0, 500.0), budget=1000)
    assert info.value.bound_reached == 1000


def test_bad_inputs_rejected():
    with pytest.raises(ConfigError):
        AffineLattice(np.diag([2.0, 1.0]), (0.0, 0.0))  # det != 1
    with pytest.raises(ConfigError):
        AffineLattice(np.eye(2), (0.0, 0.0, 0.0))  # shift length
    with pytest.raises(ConfigError):
        ShellSpec(1.0, 10.0)  # c must stay below 1
    with pytest.raises(ConfigError):
        ShellSpec(-0.1, 10.0)
    with pytest.raises(ConfigError):
        ConeSpec(2, -1.0, 0.0)


def test_csv_export_format():
    lat = AffineLattice.integer(2, (0.5, 0.5))
    pts = enumerate_shell(lat, ShellSpec(0.0, 1.5))
    buf = io.StringIO()
    pts.write_csv(buf, config={"seed": 3, "T": 1.5})
    text = buf.getvalue()
    lines = text.split("\n")
    assert lines[0].startswith("# config {")
    assert '"T": 1.5' in lines[0] and '"seed": 3' in lines[0]
    assert lines[1] == "m1,m2,x1,x2,norm"
    assert "\r" not in text
    # floats are full-precision reprs, parseable back to identical values
    first = lines[2].split(",")
    assert float(first[2]) == pts.points[0, 0]
    assert float(first[4]) == pts.norms[0]
    # deterministic: a second write is byte-identical
    buf2 = io.StringIO()
    pts.write_csv(buf2, config={"seed": 3, "T": 1.5})
    assert buf2.getvalue() == text


def test_ball_volume_and_sphere_area_consistency():
    # area of S^{d-1} equals d * vol(B^d)
    for d in (2, 3, 4, 5):
        assert sphere_area(d) == pytest.approx(d * ball_volume(d), rel=1e-12)
    assert ball_volume(1) == pytest.approx(2.0)
    assert ball_volume(2) == pytest.approx(np.pi)
    assert sphere_area(3) == pytest.approx(4.0 * np.pi)
