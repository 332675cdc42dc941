import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinfp.group import (
    KineticCylinder,
    PhasePoint,
    compose,
    compose_box,
    compose_box_inv,
    box_contains,
    dilate,
    dilate_box,
    inverse,
    kdist,
    knorm,
    knorm_batch,
)

from oracles import knorm_grid

coord = st.floats(-50, 50, allow_nan=False)
zs = st.tuples(coord, coord, coord)
int_coord = st.integers(-9, 9)
int_zs = st.tuples(int_coord, int_coord, int_coord)


def test_compose_example():
    assert compose((1, 2, 3), (1, 0, 0)) == (2, 5, 3)


def test_inverse_example():
    assert inverse((1, 2, 3)) == (-1, 1, -3)


def test_dilate_example():
    assert dilate(2, (1, 1, 1)) == (4, 8, 2)


def test_not_commutative():
    a, b = (1, 0, 1), (1, 0, 0)
    assert compose(a, b) != compose(b, a)


@given(int_zs, int_zs, int_zs)
@settings(max_examples=200, deadline=None)
def test_associative_exact_on_integers(a, b, c):
    assert compose(compose(a, b), c) == compose(a, compose(b, c))


@given(zs, zs, zs)
@settings(max_examples=200, deadline=None)
def test_associative_floats(a, b, c):
    lhs = compose(compose(a, b), c)
    rhs = compose(a, compose(b, c))
    for u, w in zip(lhs, rhs):
        assert u == pytest.approx(w, rel=1e-12, abs=1e-9)


@given(zs)
@settings(max_examples=200, deadline=None)
def test_inverse_cancels(a):
    for u in compose(inverse(a), a):
        assert u == pytest.approx(0.0, abs=1e-10)
    for u in compose(a, inverse(a)):
        assert u == pytest.approx(0.0, abs=1e-10)


@given(zs, st.floats(0.1, 10))
@settings(max_examples=200, deadline=None)
def test_dilation_morphism(a, r):
    lhs = dilate(r, compose(a, a))
    rhs = compose(dilate(r, a), dilate(r, a))
    for u, w in zip(lhs, rhs):
        assert u == pytest.approx(w, rel=1e-12, abs=1e-9)


def test_knorm_frozen_values():
    # pure-x point: min over w of max(2, |w|, ...) stays at the cube root
    assert knorm((0.0, 8.0, 0.0)) == pytest.approx(2.0, abs=1e-8)
    # pure-t point: the w-independent term is the floor
    assert knorm((4.0, 0.0, 0.0)) == pytest.approx(2.0, abs=1e-8)
    assert knorm((0.0, 0.0, 0.0)) == 0.0
    # all four terms active: solving max(|t|^.5, |1 - t w|^(1/3), |w|) with
    # t = m^2, w = -m gives m^3 = 1 - m^3
    m = 0.5 ** (1.0 / 3.0)
    assert knorm((m**2, -1.0, 0.0)) <= knorm_grid(m**2, -1.0, 0.0) + 1e-8


@given(zs)
@settings(max_examples=60, deadline=None)
def test_knorm_matches_grid_oracle(z):
    t, x, v = z
    fast = knorm(z)
    ref = knorm_grid(t, x, v, n=20001)
    # the scan only overestimates; slope of the max objective is at most ~2
    M = max(abs(t) ** 0.5, abs(x) ** (1 / 3), abs(v), 1e-30)
    step = 2.0 * M / 20000
    assert fast <= ref + 1e-7
    assert fast >= ref - 4.0 * step


@given(zs, st.floats(0.05, 8))
@settings(max_examples=150, deadline=None)
def test_knorm_dilation_homogeneous(z, r):
    assert knorm(dilate(r, z)) == pytest.approx(r * knorm(z), rel=1e-6, abs=1e-8)


def test_knorm_symmetric_under_inverse():
    rng = np.random.default_rng(7)
    for _ in range(80):
        z = tuple(rng.normal(scale=3.0, size=3))
        assert knorm(z) == pytest.approx(knorm(inverse(z)), rel=1e-7, abs=1e-9)


@given(int_zs, int_zs, int_zs)
@settings(max_examples=120, deadline=None)
def test_kdist_left_invariant_exact_integers(z, z1, z2):
    # integer coordinates compose exactly in floating point, so the two
    # minimizations see bitwise-identical arguments
    a = kdist(compose(z, z1), compose(z, z2))
    b = kdist(z1, z2)
    assert a == b


@given(zs, zs, zs)
@settings(max_examples=120, deadline=None)
def test_kdist_left_invariant_floats(z, z1, z2):
    a = kdist(compose(z, z1), compose(z, z2))
    b = kdist(z1, z2)
    # the x component of the metric is a cube root, so coordinate roundoff
    # (~1e-12 at these magnitudes) can only cancel to ~1e-4 in the distance
    assert a == pytest.approx(b, rel=1e-6, abs=5e-4)


def test_kdist_symmetry_and_triangle():
    rng = np.random.default_rng(11)
    pts = rng.normal(scale=2.5, size=(120, 3))
    for i in range(40):
        z1, z2, z3 = pts[3 * i], pts[3 * i + 1], pts[3 * i + 2]
        d12 = kdist(tuple(z1), tuple(z2))
        d21 = kdist(tuple(z2), tuple(z1))
        assert d12 == pytest.approx(d21, rel=1e-7, abs=1e-9)
        d13 = kdist(tuple(z1), tuple(z3))
        d23 = kdist(tuple(z2), tuple(z3))
        assert d13 <= d12 + d23 + 1e-7


def test_kdist_dilation_covariance():
    rng = np.random.default_rng(3)
    for _ in range(40):
        z1, z2 = rng.normal(scale=2.0, size=(2, 3))
        r = float(rng.uniform(0.2, 5.0))
        lhs = kdist(dilate(r, tuple(z1)), dilate(r, tuple(z2)))
        assert lhs == pytest.approx(r * kdist(tuple(z1), tuple(z2)), rel=1e-6, abs=1e-8)


def test_knorm_batch_matches_scalar():
    rng = np.random.default_rng(5)
    t, x, v = rng.normal(scale=4.0, size=(3, 50))
    batch = knorm_batch(t, x, v)
    for i in range(50):
        assert batch[i] == pytest.approx(knorm((t[i], x[i], v[i])), abs=1e-10)


def test_knorm_tolerance_cap():
    with pytest.raises(RuntimeError):
        knorm((1.0, 1.0, 1.0), tol=1e-200)


def test_cylinder_membership_and_dilation():
    c = KineticCylinder(PhasePoint(0.0, 0.0, 0.0), 1.0)
    assert c.contains((0.0, 0.0, 0.0))
    assert c.contains((-0.5, 0.05, 0.2))
    assert not c.contains((0.5, 0.0, 0.0))  # later than the center
    assert not c.contains((0.0, 9.0, 0.0))
    rng = np.random.default_rng(13)
    big = c.dilated(2.0)
    for _ in range(40):
        z = tuple(rng.normal(scale=0.8, size=3))
        if c.contains(z, tol=1e-9):
            assert big.contains(dilate(2.0, z), tol=1e-7)


def test_compose_box_hull_tight():
    rng = np.random.default_rng(17)
    for _ in range(25):
        lo = rng.normal(scale=2.0, size=(2, 3))
        A = tuple(tuple(sorted((lo[0][k], lo[0][k] + abs(rng.normal())))) for k in range(3))
        B = tuple(tuple(sorted((lo[1][k], lo[1][k] + abs(rng.normal())))) for k in range(3))
        hull = compose_box(A, B)
        hull_inv = compose_box_inv(A, B)
        samples_a = np.stack([rng.uniform(*A[k], size=300) for k in range(3)])
        samples_b = np.stack([rng.uniform(*B[k], size=300) for k in range(3)])
        zc = compose(tuple(samples_a), tuple(samples_b))
        zi = compose(tuple(samples_a), inverse(tuple(samples_b)))
        for k in range(3):
            assert np.all(zc[k] >= hull[k][0] - 1e-9) and np.all(zc[k] <= hull[k][1] + 1e-9)
            assert np.all(zi[k] >= hull_inv[k][0] - 1e-9) and np.all(zi[k] <= hull_inv[k][1] + 1e-9)
        # tightness: corners of the interval boxes are realized by corner pairs
        corners_a = np.array(np.meshgrid(*A, indexing="ij")).reshape(3, -1)
        corners_b = np.array(np.meshgrid(*B, indexing="ij")).reshape(3, -1)
        best = [np.inf, np.inf, np.inf]
        worst = [-np.inf, -np.inf, -np.inf]
        for i in range(corners_a.shape[1]):
            for j in range(corners_b.shape[1]):
                z = compose(tuple(corners_a[:, i]), inverse(tuple(corners_b[:, j])))
                for k in range(3):
                    best[k] = min(best[k], z[k])
                    worst[k] = max(worst[k], z[k])
        for k in range(3):
            assert best[k] == pytest.approx(hull_inv[k][0], rel=1e-9, abs=1e-9)
            assert worst[k] == pytest.approx(hull_inv[k][1], rel=1e-9, abs=1e-9)


def test_dilate_box_membership():
    B = ((-1.0, 2.0), (-0.5, 0.5), (-2.0, 1.0))
    rng = np.random.default_rng(23)
    pts = np.stack([rng.uniform(*B[k], size=200) for k in range(3)])
    db = dilate_box(1.7, B)
    z = dilate(1.7, tuple(pts))
    assert box_contains(db, ((z[0].min(), z[0].max()), (z[1].min(), z[1].max()), (z[2].min(), z[2].max())), tol=1e-9)
