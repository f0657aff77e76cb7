import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_principal.minkowski import (ETA, CausalCharacter, Isometry21, boost_S, boost_T,
                                         classify_vector, isometry_defect, minkowski_cross,
                                         minkowski_dot, minkowski_norm, rotation_R, rotations)

coord = st.floats(-10, 10, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)
angle = st.floats(-2, 2, allow_nan=False)


@pytest.mark.parametrize("v, expected", [((1, 0, 0), 1.0), ((0, 0, 1), -1.0), ((1, 0, 1), 0.0)])
def test_dot_basis(v, expected):
    assert minkowski_dot(v, v) == expected


@pytest.mark.parametrize("v, expected", [((0, 0, 2), 2.0), ((3, 4, 0), 5.0), ((1, 0, 1), 0.0)])
def test_norm(v, expected):
    assert minkowski_norm(v) == pytest.approx(expected)


@pytest.mark.parametrize("u, v, expected", [
    ((1, 0, 0), (0, 1, 0), (0, 0, -1)),
    ((1, 0, 0), (1, 0, 0), (0, 0, 0)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
])
def test_cross_examples(u, v, expected):
    np.testing.assert_allclose(minkowski_cross(u, v), expected)


@given(vec, vec)
def test_cross_is_orthogonal_to_factors(u, v):
    w = minkowski_cross(u, v)
    scale = 1 + np.linalg.norm(u) ** 2 * np.linalg.norm(v)
    assert abs(minkowski_dot(w, u)) <= 1e-10 * scale
    assert abs(minkowski_dot(w, v)) <= 1e-10 * scale


@given(vec, vec)
def test_cross_lagrange_identity(u, v):
    # <u x v, u x v> = -(<u,u><v,v> - <u,v>^2) in signature (+,+,-)
    w = minkowski_cross(u, v)
    lhs = minkowski_dot(w, w)
    rhs = -(minkowski_dot(u, u) * minkowski_dot(v, v) - minkowski_dot(u, v) ** 2)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + np.linalg.norm(u) ** 2 * np.linalg.norm(v) ** 2))


def test_dot_broadcasts_over_arrays():
    P = np.arange(12.0).reshape(4, 3)
    np.testing.assert_allclose(minkowski_dot(P, P), P[:, 0] ** 2 + P[:, 1] ** 2 - P[:, 2] ** 2)


@pytest.mark.parametrize("v, kind", [
    ((0, 0, 0), CausalCharacter.SPACELIKE),
    ((0, 0, 1), CausalCharacter.TIMELIKE),
    ((1, 0, 1), CausalCharacter.LIGHTLIKE),
    ((1, 0, 0.5), CausalCharacter.SPACELIKE),
])
def test_classify(v, kind):
    assert classify_vector(v) is kind


def test_rotation_identity_and_boost_action():
    np.testing.assert_allclose(rotation_R(0.0), np.eye(3))
    a = 0.8
    np.testing.assert_allclose(boost_S(a) @ [0, 0, 1], [math.sinh(a), 0, math.cosh(a)])
    T = boost_T(1.3)
    np.testing.assert_allclose(T.T @ ETA @ T, ETA, atol=1e-14)


@given(angle, angle, angle)
def test_rotations_are_isometries(th, al, be):
    L = rotations(th, al, be).linear
    assert isometry_defect(L) <= 1e-10 * max(1.0, np.abs(L).max() ** 2)


@settings(max_examples=50)
@given(angle, angle, angle, vec, vec)
def test_isometry_preserves_dot_and_inverts(th, al, be, t, p):
    iso = Isometry21(rotations(th, al, be).linear, t)
    q = np.array([0.3, -1.0, 0.7])
    d0 = minkowski_dot(p - q, p - q)
    d1 = minkowski_dot(iso(p) - iso(q), iso(p) - iso(q))
    assert d1 == pytest.approx(d0, rel=1e-8, abs=1e-7)
    np.testing.assert_allclose(iso.inverse()(iso(p)), p, atol=1e-8 * (1 + np.abs(iso(p)).max() * 50))


def test_compose_order():
    f = Isometry21(rotation_R(0.4), [1.0, 0.0, 0.0])
    g = Isometry21(boost_S(0.2), [0.0, 2.0, 0.0])
    p = np.array([0.5, 0.1, -0.3])
    np.testing.assert_allclose((f @ g)(p), f(g(p)))


def test_isometry_rejects_bad_shapes():
    with pytest.raises(ValueError):
        Isometry21(np.eye(2))
