import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_principal import quadrics as Q
from lorentz_principal.errors import DomainError, NotPositiveDefiniteError, ParamError
from lorentz_principal.minkowski import (ETA, Isometry21, boost_S, minkowski_dot, rotation_R,
                                         rotations)

A, B, C = 2.0, 1.5, 2.2


def test_parameter_validation():
    with pytest.raises(ParamError):
        Q.ConfocalParams(1.5, 2.0, 1.0)
    with pytest.raises(ParamError):
        Q.StoParams(1.0, 2.0, -1)
    with pytest.raises(ParamError):
        Q.global_principal_chart(1.0, 1.0, 1.0)


def test_principal_chart_lies_on_ellipsoid():
    rng = np.random.default_rng(0)
    u = rng.uniform(0, math.pi, 10_000)
    v = rng.uniform(0, 2 * math.pi, 10_000)
    X = Q.global_principal_chart(A, B, C).point(u, v)
    assert np.max(np.abs(Q.ellipsoid_residual(A, B, C, X))) <= 1e-12


def test_principal_chart_seam_and_umbilic_parameters():
    chart = Q.global_principal_chart(A, B, C)
    assert Q.principal_chart_seam(0.0, 1.0) and Q.principal_chart_seam(math.pi, 2.0)
    assert not Q.principal_chart_seam(1.0, 1.0)
    pts = np.array([chart.point(*uv) for uv in Q.principal_chart_umbilic_params()])
    umb = Q.ellipsoid_umbilics(A, B, C)
    for x in pts:
        assert np.min(np.linalg.norm(umb - x, axis=1)) <= 1e-12


def test_tropic_parameter():
    assert Q.tropic_parameter(A, B, C) == pytest.approx(0.598418893, abs=1e-9)


def test_octant_point_on_three_families():
    p = Q.ConfocalParams(A, B, C)
    t = p.sample(np.random.default_rng(1), 1000)
    X = Q.octant_point(p, t[:, 0], t[:, 1], t[:, 2])
    for k in range(3):
        assert np.max(np.abs(p.family_residual(t[:, k], X))) <= 1e-10
    with pytest.raises(DomainError):
        Q.octant_point(p, 10.0, 3.0, 0.0)


def test_octant_frame_orthogonal_with_nonzero_determinant():
    p = Q.ConfocalParams(A, B, C)
    t = p.sample(np.random.default_rng(2), 1000)
    X, D = Q.octant_frame(p, t[:, 0], t[:, 1], t[:, 2])
    for i, j in ((0, 1), (0, 2), (1, 2)):
        assert np.max(np.abs(minkowski_dot(D[..., i], D[..., j]))) <= 1e-12
    det = np.linalg.det(D)
    np.testing.assert_allclose(det, Q.octant_det_closed_form(p, t[:, 0], t[:, 1], t[:, 2]), rtol=1e-10)
    assert np.all(det != 0)


def test_cap_equation_vanishes_at_umbilic():
    u0 = math.sqrt((A * A - B * B) / (A * A + C * C))
    L, M, N = Q.graph_chart_equation(A, B, C)(u0, 0.0)
    assert abs(L) + abs(M) + abs(N) <= 1e-14
    with pytest.raises(DomainError):
        Q.graph_chart_equation(A, B, C)(0.9, 0.9)


class TestConfocalConics:
    cc = Q.ConfocalConics.from_ellipsoid(A, B, C)
    t = np.linspace(-2, 2, 81)

    def test_ellipse_r1(self):
        c1 = Q.ConfocalConics(1.0)
        P, T = c1.ellipse(1.0, self.t)
        np.testing.assert_allclose(P[:, 0] ** 2 / 2.0 + P[:, 1] ** 2, 1.0)
        assert np.max(c1.residual(P, T)) <= 1e-14

    def test_axes(self):
        s = np.linspace(0.1, 2, 20)
        zero = np.zeros_like(s)
        assert np.max(self.cc.residual(np.stack([s, zero], -1), np.stack([np.ones_like(s), zero], -1))) == 0
        assert np.max(self.cc.residual(np.stack([zero, s], -1), np.stack([zero, np.ones_like(s)], -1))) == 0

    def test_hyperbola_needs_sum_relation(self):
        P, T = self.cc.hyperbola(0.3, self.t)
        assert np.max(self.cc.residual(P, T)) <= 1e-14
        P, T = self.cc.hyperbola(0.3, self.t[self.t != 0], as_printed=True)
        assert np.max(self.cc.residual(P, T)) > 1e-3

    def test_families_cross_at_right_angles_in_cap_coordinates(self):
        x = self.cc.intersection(0.4, 0.3)
        assert np.all(np.isfinite(x))
        Pe, Te = self.cc.ellipse(0.4, np.array([math.asin(x[1] / 0.4)]))
        np.testing.assert_allclose(Pe[0], x, atol=1e-12)
        uv = Q.conics_to_cap(A, B, C, x)
        assert np.hypot(*uv) < 1


def test_sto_orthogonality_and_ellipsoid_parameters():
    p, w = Q.sto_params_for_ellipsoid(A, B, C)
    assert p.eps == -1
    assert math.cosh(w) == pytest.approx(A / math.sqrt(A * A - B * B))
    rng = np.random.default_rng(3)
    for t in p.sample(rng, 500):
        _, D = Q.sto_frame(p, *t)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            assert abs(minkowski_dot(D[:, i], D[:, j])) <= 1e-10
    uu, vv = rng.uniform(0, 2 * math.pi, (2, 2000))
    assert np.max(np.abs(Q.ellipsoid_residual(A, B, C, Q.sto_point(p, uu, vv, w)))) <= 1e-12


@pytest.mark.parametrize("params", [Q.StoParams(1.3228756555322954, 1.1847207892226292, -1),
                                    Q.StoParams(1.3, 0.9, 1)])
def test_sto_quadrics(params):
    rng = np.random.default_rng(4)
    for t in params.sample(rng, 200):
        X = Q.sto_point(params, *t)
        for k, axis in enumerate("uvw"):
            coeff = Q.sto_quadric(params, axis, float(t[k]))
            assert abs(Q.quadric_residual(coeff, X)) <= 1e-9
    t = params.sample(rng, 1)[0]
    assert Q.quadric_surface_type(Q.sto_quadric(params, "u", float(t[0]))) != "empty"


def test_sto_quadrics_as_printed_do_not_vanish():
    p, w = Q.sto_params_for_ellipsoid(A, B, C)
    t = p.sample(np.random.default_rng(5), 20)
    for k, axis in enumerate("uvw"):
        worst = max(abs(Q.quadric_residual(Q.sto_quadric(p, axis, float(s[k]), as_printed=True),
                                           Q.sto_point(p, *s))) for s in t)
        assert worst > 1e-3


class TestCanonicalize:
    def test_diagonal_input_is_fixed(self):
        q = Q.GeneralQuadric(1 / A ** 2, 1 / B ** 2, 1 / C ** 2)
        cf = Q.canonicalize(q)
        np.testing.assert_allclose(np.abs(cf.isometry.linear), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(cf.isometry.translation, 0, atol=1e-14)
        np.testing.assert_allclose(cf.lambdas, [1 / A ** 2, 1 / B ** 2, 1 / C ** 2], rtol=1e-12)

    def test_rotated_and_boosted_ellipsoid(self):
        q = Q.GeneralQuadric(1 / 4, 1 / 2.25, 1 / 4.84)
        moved = q.transformed(Isometry21(boost_S(0.3) @ rotation_R(0.7)))
        cf = Q.canonicalize(moved)
        np.testing.assert_allclose(sorted(cf.lambdas), sorted([1 / 4, 1 / 2.25, 1 / 4.84]), rtol=1e-8)
        L = cf.eigenvectors
        G = L.T @ ETA @ L
        np.testing.assert_allclose(G, ETA, atol=1e-10)
        assert minkowski_dot(L[:, 2], L[:, 2]) < 0

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
           st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)))
    def test_canonical_identity(self, th, al, be, t):
        q = Q.GeneralQuadric(1 / A ** 2, 1 / B ** 2, 1 / C ** 2).transformed(
            Isometry21(rotations(th, al, be).linear, t))
        cf = Q.canonicalize(q)
        P = np.random.default_rng(0).normal(size=(50, 3))
        lhs = q(cf.isometry(P))
        rhs = -cf.kappa * (cf.diagonal_value(P) - 1.0)
        assert np.max(np.abs(lhs - rhs)) <= 1e-8 * max(1.0, abs(cf.kappa))
        assert cf.isometry.defect() <= 1e-10

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            Q.canonicalize(Q.GeneralQuadric(1.0, -1.0, 1.0))
        with pytest.raises(NotPositiveDefiniteError):
            Q.canonicalize(Q.GeneralQuadric(1.0, 1.0, 1.0, l=1.0))
