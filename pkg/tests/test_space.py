import numpy as np
import pytest
from hypothesis import given, strategies as st

from zonediag import Box, DomainError, FinitePointSet, Norm, Space, UnsupportedOperation
from zonediag import distance, glued_space, point_along, set_distance
from zonediag.space import GluedSet

coord = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
pt2 = st.tuples(coord, coord).map(np.array)


def random_glued_points(rng, n):
    seg = np.column_stack([np.zeros(n), 3.0 - rng.random(n) * 4.999])
    ang = rng.random(n) * 2 * np.pi
    rad = np.sqrt(rng.random(n))
    disk = np.column_stack([rad * np.cos(ang), -3.0 + rad * np.sin(ang)])
    pts = np.vstack([seg, disk])
    return pts[rng.permutation(len(pts))]


def test_l1_distance():
    s = Space(Box((-5, -5), (5, 5)), Norm.L1)
    assert distance(s, [0, 0], [2, 1]) == 3


def test_glued_distance_goes_through_junction():
    assert distance(glued_space(), [0, 3], [0, -3]) == pytest.approx(6.0)


def test_distance_to_self_is_zero():
    for s in (Space(Box((0, 0), (1, 1)), Norm.LINF), glued_space()):
        assert distance(s, [0, 0.5] if s.dim == 2 else [0.5], [0, 0.5]) == 0


def test_point_outside_world():
    s = Space(Box((0, 0), (1, 1)))
    with pytest.raises(DomainError):
        distance(s, [2, 0], [0, 0])
    with pytest.raises(DomainError):
        distance(glued_space(), [1, 1], [0, 0])


def test_point_along_examples():
    s = Space(Box((-3, -3), (3, 3)))
    assert np.allclose(point_along(s, [0, 0], [2, 0], 1), [1, 0])
    assert np.allclose(point_along(s, [0, 0], [2, 0], 0), [0, 0])
    assert np.allclose(point_along(glued_space(), [0, 0], [0, -3], 2), [0, -2])


def test_point_along_errors(three_points):
    with pytest.raises(UnsupportedOperation):
        point_along(three_points, [-1], [1], 1)
    s = Space(Box((-3, -3), (3, 3)))
    with pytest.raises(DomainError):
        point_along(s, [0, 0], [1, 0], 1.5)
    with pytest.raises(DomainError):
        point_along(s, [0, 0], [1, 0], -0.1)


def test_set_distance_examples():
    l2 = Space(Box((-5, -5), (5, 5)), Norm.L2)
    l1 = Space(Box((-5, -5), (5, 5)), Norm.L1)
    assert set_distance(l2, [[0, 0]], [[1, 0], [3, 0]]) == 1
    assert set_distance(l2, np.zeros((0, 2)), [[1, 0]]) == np.inf
    assert set_distance(l1, [[2, 1]], [[-2, 1], [2, -1]]) == 2


def test_geodesic_flags(three_points):
    assert not three_points.geodesic
    assert Space(FinitePointSet([[0.0]])).geodesic
    assert Space(Box((0,), (1,))).geodesic
    assert glued_space().geodesic


@pytest.mark.parametrize("norm", list(Norm))
def test_triangle_inequality_box(norm):
    rng = np.random.default_rng(1)
    s = Space(Box((-4, -4, -4), (4, 4, 4)), norm)
    X, Y, Z = (rng.uniform(-4, 4, (1000, 3)) for _ in range(3))
    dxy = norm.of(X - Y, axis=1)
    dyz = norm.of(Y - Z, axis=1)
    dxz = norm.of(X - Z, axis=1)
    assert np.all(dxz <= dxy + dyz + 1e-9)
    assert s.distance(X[0], Y[0]) == pytest.approx(dxy[0])


def test_triangle_inequality_finite():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(40, 2))
    s = Space(FinitePointSet(pts), Norm.L1)
    D = s.pairwise(pts, pts)
    idx = rng.integers(0, 40, (1000, 3))
    a, b, c = idx.T
    assert np.all(D[a, c] <= D[a, b] + D[b, c] + 1e-9)
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)


def test_triangle_inequality_glued():
    rng = np.random.default_rng(3)
    s = glued_space()
    X, Y, Z = (random_glued_points(rng, 500) for _ in range(3))
    dxy = np.diag(s.pairwise(X, Y))
    dyz = np.diag(s.pairwise(Y, Z))
    dxz = np.diag(s.pairwise(X, Z))
    assert np.all(dxz <= dxy + dyz + 1e-9)
    assert np.all(dxy >= 0)


@pytest.mark.parametrize("norm", list(Norm))
def test_geodesic_consistency_box(norm):
    rng = np.random.default_rng(4)
    s = Space(Box((-4, -4), (4, 4)), norm)
    for _ in range(200):
        x, y = rng.uniform(-4, 4, (2, 2))
        d = s.distance(x, y)
        for t in (0, d / 4, d / 2, d):
            g = s.point_along(x, y, t)
            assert s.distance(x, g) == pytest.approx(t, abs=1e-9)
            assert s.distance(g, y) == pytest.approx(d - t, abs=1e-9)


def test_geodesic_consistency_glued():
    rng = np.random.default_rng(5)
    s = glued_space()
    P = random_glued_points(rng, 200)
    for x, y in zip(P[::2], P[1::2]):
        d = s.distance(x, y)
        for t in (0, d / 4, d / 2, d):
            g = s.point_along(x, y, t)
            assert s.distance(x, g) == pytest.approx(t, abs=1e-9)
            assert s.distance(g, y) == pytest.approx(d - t, abs=1e-9)


@given(st.lists(pt2, min_size=1, max_size=6), st.lists(pt2, min_size=1, max_size=6))
def test_set_distance_symmetric_and_below_pairs(A, B):
    s = Space(Box((-5, -5), (5, 5)), Norm.L2)
    A, B = np.array(A), np.array(B)
    d = s.set_distance(A, B)
    assert d == s.set_distance(B, A)
    for a in A:
        for b in B:
            assert d <= s.distance(a, b) + 1e-12


def test_glued_sets_closed_form_distance():
    s = glued_space()
    R1 = GluedSet(1.0, 3.0)
    R2 = GluedSet(-2.0, -1.0, lo_closed=False, disk=True)
    assert s.set_distance(R1, R2) == pytest.approx(2.0)
    # brute force on a dense sampling of both sets
    seg1 = np.column_stack([np.zeros(201), np.linspace(1, 3, 201)])
    seg2 = np.column_stack([np.zeros(101), np.linspace(-1.99, -1, 101)])
    assert np.allclose(R2.distance(seg1), s.pairwise(seg1, seg2).min(axis=1), atol=0.02)
    assert R1.contains([[0, 1.0]])[0] and not R1.contains([[0, 0.999]])[0]
    assert R2.contains([[0.5, -3.0]])[0] and not R2.contains([[0, -0.99]])[0]
