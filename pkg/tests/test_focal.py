import math

import numpy as np
import pytest

from lorentz_principal import focal as Fo
from lorentz_principal import quadrics as Q
from lorentz_principal.bde import GridSpec
from lorentz_principal.errors import ParamError

A, B, C = 2.0, 1.5, 2.2
GRID = GridSpec(60, 60)


@pytest.fixture(scope="module")
def chart():
    return Q.global_principal_chart(A, B, C)


@pytest.mark.parametrize("which", ["F1", "F2"])
def test_numeric_sheet_matches_corrected_closed_form(chart, which):
    num = Fo.focal_numeric(chart, which, GRID)
    ref = Fo.focal_closed_form(A, B, C, which, GRID, variant="corrected")
    assert num.valid_fraction() > 0.99
    assert Fo.compare_sheets(num, ref) <= 1e-6


def test_printed_first_sheet_differs_off_the_xz_plane(chart):
    num = Fo.focal_numeric(chart, "F1", GRID)
    printed = Fo.focal_closed_form(A, B, C, "F1", GRID)
    assert Fo.compare_sheets(num, printed) > 1e-2
    # the two variants agree where the first coordinate vanishes
    u = math.pi / 2
    v = np.linspace(0.1, 3.0, 7)
    np.testing.assert_allclose(Fo.focal_closed_form_point(A, B, C, "F1", u, v),
                               Fo.focal_closed_form_point(A, B, C, "F1", u, v, "corrected"), atol=1e-15)


def test_closed_form_special_values():
    P = Fo.focal_closed_form_point(A, B, C, "F2", 0.7, math.pi / 2)
    assert abs(P[2]) <= 1e-15
    P = Fo.focal_closed_form_point(A, B, C, "F1", math.pi / 2, 0.4)
    assert abs(P[0]) <= 1e-15
    with pytest.raises(ValueError):
        Fo.focal_closed_form_point(A, B, C, "F3", 0.1, 0.1)
    with pytest.raises(ValueError):
        Fo.focal_closed_form_point(A, B, C, "F1", 0.1, 0.1, variant="other")
    with pytest.raises(ParamError):
        Fo.focal_closed_form(1.0, 2.0, 1.0)


def test_sheets_meet_at_umbilic_focal_points():
    for u, v in Q.principal_chart_umbilic_params():
        p1 = Fo.focal_closed_form_point(A, B, C, "F1", u, v, "corrected")
        p2 = Fo.focal_closed_form_point(A, B, C, "F2", u, v, "corrected")
        np.testing.assert_allclose(p1, p2, atol=1e-12)


def test_closed_form_finite_across_tropic(chart):
    v1 = Q.tropic_parameter(A, B, C)
    u = np.linspace(0, math.pi, 11)
    for which in ("F1", "F2"):
        P = Fo.focal_closed_form_point(A, B, C, which, u, v1, "corrected")
        assert np.all(np.isfinite(P))
        near = Fo.focal_numeric(chart, which, GridSpec(11, 3, (0.0, math.pi), (v1 - 1e-6, v1 + 1e-6)))
        X = near.points_xyz[:, 1][near.valid[:, 1]]
        assert X.size == 0 or np.all(np.isfinite(X))


def test_plane_has_no_focal_set():
    sheet = Fo.focal_numeric(Q.plane_chart(1.0), "F1", GridSpec(20, 20))
    assert not sheet.valid.any()
    assert Fo.focal_singular_locus(sheet) == []


def test_singular_curves_lie_in_coordinate_planes(chart):
    s1 = Fo.focal_numeric(chart, "F1", GRID)
    locus1 = Fo.focal_singular_locus(s1)
    assert len(locus1) >= 1 and s1.singular_points is locus1
    assert np.max(np.abs(locus1[0].polyline_xyz[:, 0])) <= 1e-8

    s2 = Fo.focal_numeric(chart, "F2", GRID)
    locus2 = Fo.focal_singular_locus(s2)
    planes = {int(np.argmin(np.max(np.abs(L.polyline_xyz), axis=0))) for L in locus2}
    assert planes == {1, 2}
    for L in locus2:
        k = int(np.argmin(np.max(np.abs(L.polyline_xyz), axis=0)))
        assert np.max(np.abs(L.polyline_xyz[:, k])) <= 1e-8


def test_open_singular_arcs_end_near_umbilic_focal_points(chart):
    s2 = Fo.focal_numeric(chart, "F2", GRID)
    foci = np.array([Fo.focal_closed_form_point(A, B, C, "F2", u, v, "corrected")
                     for u, v in Q.principal_chart_umbilic_params()])
    open_arcs = [L for L in Fo.focal_singular_locus(s2) if not L.closed]
    assert open_arcs
    for L in open_arcs:
        for end in (L.polyline_xyz[0], L.polyline_xyz[-1]):
            assert np.min(np.linalg.norm(foci - end, axis=1)) <= 5e-3
