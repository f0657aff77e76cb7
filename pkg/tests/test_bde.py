import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorentz_principal import bde as B
from lorentz_principal import quadrics as Q
from lorentz_principal.atlas import Atlas
from lorentz_principal.jets import ChartSpec, Domain, eval_jet
from lorentz_principal.surface import fundamental_data

A, Bb, C = 2.0, 1.5, 2.2


def test_factored_quadratic_directions():
    dp = B.solve_directions(0.0, 1.0, 0.0, 1.0)
    got = sorted(tuple(np.round(np.abs(d), 12)) for d in (dp.d1, dp.d2))
    assert got == [(0.0, 1.0), (1.0, 0.0)]
    assert dp.multiplicity is B.Multiplicity.TWO


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_roots_solve_the_equation(L, M, N):
    scale = abs(L) + abs(M) + abs(N)
    dp = B.solve_directions(L, M, N, max(scale, 1e-300))
    if dp.multiplicity is B.Multiplicity.TWO:
        for d in (dp.d1, dp.d2):
            assert B.direction_residual(L, M, N, d) <= 1e-12
    if M * M - 4 * L * N < -1e-9 * scale ** 2:
        assert dp.multiplicity is B.Multiplicity.NONE


def test_principal_chart_directions_are_axes():
    fd = fundamental_data(eval_jet(Q.global_principal_chart(A, Bb, C), 1.2, 2.0))
    dp = B.principal_directions(fd)
    got = sorted(tuple(np.round(np.abs(d), 9)) for d in (dp.d1, dp.d2))
    assert got == [(0.0, 1.0), (1.0, 0.0)]


def test_cap_equation_on_u_axis():
    L, M, N = Q.graph_chart_equation(A, Bb, C)(0.0, 0.5)
    assert L == 0 and N == 0
    assert M == pytest.approx(-0.25 * (Bb * Bb + C * C) - A * A + Bb * Bb)


def test_leaf_on_coordinate_ellipse_closes():
    # the section x = 0 of the ellipsoid is a curvature line
    atlas = Q.ellipsoid_atlas(A, Bb, C)
    umb = list(Q.ellipsoid_umbilics(A, Bb, C))
    seed = np.array([0.0, Bb * math.sin(0.4), C * math.cos(0.4)])
    best = None
    for fol in ("F1", "F2"):
        cv = B.integrate_on_atlas(atlas, seed, fol, B.IntegrationOptions(), umbilics=umb)
        dev = float(np.max(np.abs(cv.points_xyz[:, 0])))
        if best is None or dev < best[0]:
            best = (dev, cv)
    dev, cv = best
    assert cv.termination is B.Termination.CLOSED
    assert dev <= 1e-6


def test_revolution_leaves_are_circles_and_meridians():
    a = 2.0
    atlas = Q.ellipsoid_atlas(a, a, C)
    seed = np.array([a * math.sin(0.7), 0.0, C * math.cos(0.7)])
    kinds = set()
    for fol in ("F1", "F2"):
        cv = B.integrate_on_atlas(atlas, seed, fol, B.IntegrationOptions(max_step_frac=0.005))
        P = cv.points_xyz
        if np.ptp(P[:, 2]) <= 1e-6:
            kinds.add("parallel")
        elif np.max(np.abs(P[:, 1])) <= 1e-6:
            kinds.add("meridian")
    assert kinds == {"parallel", "meridian"}


def test_generic_seed_closes_on_triaxial_ellipsoid():
    atlas = Q.ellipsoid_atlas(A, Bb, C)
    umb = list(Q.ellipsoid_umbilics(A, Bb, C))
    d = np.array([0.3, 0.8, 0.5])
    seed = d / math.sqrt((d[0] / A) ** 2 + (d[1] / Bb) ** 2 + (d[2] / C) ** 2)
    for fol in ("F1", "F2"):
        cv = B.integrate_on_atlas(atlas, seed, fol, B.IntegrationOptions(), umbilics=umb)
        assert cv.termination is B.Termination.CLOSED
        assert cv.closed
        assert np.max(np.abs(Q.ellipsoid_residual(A, Bb, C, cv.points_xyz))) <= 1e-10


def test_single_chart_leaf_exits_domain():
    chart = Q.polynomial_graph_chart({(2, 0): 0.3, (0, 2): 0.1}, half_width=0.5)
    cv = B.integrate_principal_line(chart, (0.1, 0.2), "F1", B.IntegrationOptions())
    assert cv.termination is B.Termination.DOMAIN_EXIT
    assert len(cv) >= 2


def test_tropic_is_two_closed_curves_with_small_residual():
    chart = Q.global_principal_chart(A, Bb, C)
    curves = B.trace_locus(chart, "LD")
    assert len(curves) == 2 and all(c.closed for c in curves)
    v1 = math.acos(C / math.sqrt(Bb * Bb + C * C))
    for c in curves:
        vv = np.mod(c.polyline_uv[:, 1], 2 * math.pi)
        assert np.allclose(np.minimum(np.abs(vv - v1), np.abs(vv - (math.pi - v1))).min(), 0, atol=1e-9) or \
            np.allclose(np.abs(np.cos(vv)), math.cos(v1), atol=1e-9)
        assert max(B.ld_residual(chart, uv) for uv in c.polyline_uv) <= 1e-7


def test_lpl_empty_on_ellipsoid_and_ld_empty_on_plane():
    assert B.trace_locus(Q.global_principal_chart(A, Bb, C), "LPL") == []
    for ch in Q.ellipsoid_atlas(A, Bb, C).charts:
        assert B.trace_locus(ch, "LPL", B.GridSpec(80, 80)) == []
    assert B.trace_locus(Q.plane_chart(), "LD") == []


def test_dupin_passes_on_triple_systems():
    for system in (Q.ConfocalParams(A, Bb, C), Q.StoParams(1.3, 0.9, 1)):
        rep = B.verify_dupin(system, "w", n_curves=10, points_per_curve=5)
        assert rep.passed and rep.max_residual <= 1e-8


class _Sheared:
    """Octant system composed with a shear: coordinate curves are no longer principal."""

    def __init__(self):
        self.p = Q.ConfocalParams(A, Bb, C)

    def sample(self, rng, count):
        return self.p.sample(rng, count)

    def admissible(self, u, v, w):
        return self.p.admissible(u, v, w)

    def surface_chart(self, fixed, value):
        base = self.p.surface_chart(fixed, value)

        def func(s, t):
            x, y, z = base.func(s, t)
            return x + 0.3 * y, y, z

        return ChartSpec("sheared", {}, base.domain, func)


def test_dupin_negative_control():
    rep = B.verify_dupin(_Sheared(), "w", n_curves=6, points_per_curve=5)
    assert not rep.passed


def test_grid_axes_respect_periodicity():
    us, vs, per = B.GridSpec(10, 8).axes(Q.global_principal_chart(A, Bb, C))
    assert per == (False, True)
    assert us[-1] == pytest.approx(math.pi)
    assert vs[-1] < 2 * math.pi
