"""Focal sheets: loci of the centres of principal curvature.

The centre of curvature along a principal direction d is

    X + N / k = X + (I(d) / II^(d)) n,

where n = Xu x Xv is the unnormalised Minkowski normal and II^ is the second
form taken against n. Writing the centre with n instead of the unit normal
cancels the factor W = sqrt|detI| before any division, so the centre stays
finite where the metric degenerates even though k itself blows up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._contour import glue_polylines, zero_contours
from .bde import GridSpec, LocusCurve
from .errors import ParamError
from .jets import ChartSpec, eval_jet_grid
from .minkowski import minkowski_cross, minkowski_dot
from . import quadrics as Q

FOLIATIONS = ("F1", "F2")


@dataclass
class FocalSheet:
    """Sampled focal sheet.

    ``points_xyz`` has shape (nu, nv, 3); ``valid`` flags the nodes where the
    centre exists (real, finite, non-zero curvature). ``singular_points`` holds
    the singular curves once :func:`focal_singular_locus` has been run.
    """

    which: str
    grid_uv: tuple
    points_xyz: np.ndarray
    valid: np.ndarray
    singular_points: list = field(default_factory=list)
    chart: Optional[ChartSpec] = None
    source: str = "numeric"
    evaluator: Optional[Callable] = field(default=None, repr=False)
    periodic: tuple = (False, False)

    @property
    def shape(self):
        return self.valid.shape

    def valid_fraction(self) -> float:
        return float(np.mean(self.valid))


def _check_which(which):
    if which not in FOLIATIONS:
        raise ValueError("which must be 'F1' or 'F2'")


def _forms(chart, U, V):
    jet = eval_jet_grid(chart, U, V)
    n = minkowski_cross(jet.Xu, jet.Xv)
    E = minkowski_dot(jet.Xu, jet.Xu)
    F = minkowski_dot(jet.Xu, jet.Xv)
    G = minkowski_dot(jet.Xv, jet.Xv)
    e = minkowski_dot(jet.Xuu, n)
    f = minkowski_dot(jet.Xuv, n)
    g = minkowski_dot(jet.Xvv, n)
    return jet, n, (E, F, G), (e, f, g)


def _is_principal_chart(I, II, tol=1e-10):
    E, F, G = I
    e, f, g = II
    fin = np.isfinite(E) & np.isfinite(F) & np.isfinite(G) & np.isfinite(f)
    if not fin.any():
        return False
    s1 = np.abs(E) + np.abs(G)
    s2 = np.abs(e) + np.abs(g)
    return bool(np.all(np.abs(F[fin]) <= tol * np.maximum(s1[fin], 1e-300))
                and np.all(np.abs(f[fin]) <= tol * np.maximum(s2[fin], 1e-300)))


def _principal_roots(I, II):
    """Both roots (du, dv) of the curvature-line equation, array-wise."""
    E, F, G = I
    e, f, g = II
    L = F * g - G * f
    M = E * g - G * e
    N = E * f - F * e
    disc = M * M - 4 * L * N
    sq = np.sqrt(np.where(disc > 0, disc, 0.0))
    q = -0.5 * (M + np.where(M >= 0, sq, -sq))
    r1 = np.stack([L, q], axis=-1)
    r2 = np.stack([q, N], axis=-1)
    # when L = q = 0 the first root collapses; fall back to the coordinate roots
    zero1 = np.hypot(L, q) <= 1e-14 * (np.abs(M) + 1e-300)
    zero2 = np.hypot(q, N) <= 1e-14 * (np.abs(M) + 1e-300)
    r1 = np.where(zero1[..., None], np.array([1.0, 0.0]), r1)
    r2 = np.where(zero2[..., None], np.array([0.0, 1.0]), r2)
    return r1, r2, disc


def _quad(form, d):
    A, B, C = form
    return A * d[..., 0] ** 2 + 2 * B * d[..., 0] * d[..., 1] + C * d[..., 1] ** 2


def _centres(chart, U, V, which, labeling="auto", rel_tol=1e-12, with_frame=False):
    jet, n, I, II = _forms(chart, U, V)
    E, F, G = I
    e, f, g = II
    detI = E * G - F * F
    coordinate = labeling == "coordinate" or (labeling == "auto" and _is_principal_chart(I, II))
    shape = np.shape(E)
    if coordinate:
        d_own = np.broadcast_to(np.array([1.0, 0.0] if which == "F1" else [0.0, 1.0]), shape + (2,))
        d_other = d_own[..., ::-1]
        ok = np.ones(shape, dtype=bool)
    else:
        r1, r2, disc = _principal_roots(I, II)
        I1, I2 = _quad(I, r1), _quad(I, r2)
        J1, J2 = _quad(II, r1), _quad(II, r2)
        # order by the normal curvature k = eps * II^ / (W I) with eps = -sign(detI)
        with np.errstate(all="ignore"):
            s = -np.sign(detI)
            k1, k2 = s * J1 / I1, s * J2 / I2
        swap = k2 > k1
        pick2 = (swap if which == "F1" else ~swap)[..., None]
        d_own = np.where(pick2, r2, r1)
        d_other = np.where(pick2, r1, r2)
        ok = disc >= 0
    num, den = _quad(I, d_own), _quad(II, d_own)
    size = np.abs(num) + np.abs(den)
    with np.errstate(all="ignore"):
        t = num / den
        ok = ok & np.isfinite(t) & (np.abs(den) > rel_tol * np.maximum(size, 1e-300))
        P = jet.X + t[..., None] * n
    ok = ok & np.all(np.isfinite(P), axis=-1)
    P = np.where(ok[..., None], P, np.nan)
    if not with_frame:
        return P, ok
    w = d_other[..., :1] * jet.Xu + d_other[..., 1:] * jet.Xv
    return P, ok, n, w, _quad(I, d_other)


def focal_numeric(chart: ChartSpec, which: str = "F1", grid: Optional[GridSpec] = None,
                  labeling: str = "auto") -> FocalSheet:
    """Focal sheet of ``chart`` sampled on ``grid``.

    ``labeling`` picks how the sheets are named. ``"coordinate"`` treats the
    chart as principal (F1 from the u-curves, F2 from the v-curves);
    ``"ordered"`` solves for both principal directions at every node and
    assigns F1 to the larger normal curvature; ``"auto"`` uses the coordinate
    labels when the chart is principal on the whole grid.
    Nodes without a real finite centre are flagged invalid.
    """
    _check_which(which)
    if labeling not in ("auto", "coordinate", "ordered"):
        raise ValueError("labeling must be 'auto', 'coordinate' or 'ordered'")
    grid = grid or GridSpec()
    us, vs, periodic = grid.axes(chart)
    U, V = np.meshgrid(us, vs, indexing="ij")
    P, ok = _centres(chart, U, V, which, labeling)

    def evaluator(u, v):
        return _centres(chart, np.asarray(u, float), np.asarray(v, float), which, labeling)[0]

    return FocalSheet(which, (U, V), P, ok, chart=chart, source="numeric",
                      evaluator=evaluator, periodic=periodic)


def focal_closed_form_point(a, b, c, which, u, v, variant: str = "printed"):
    """Closed-form focal point of the ellipsoid over the global principal chart.

    ``variant="printed"`` keeps sqrt(a^2 + b^2) in the first coordinate of the
    F1 sheet; ``"corrected"`` uses sqrt(a^2 + c^2), which is what the centres
    of curvature actually give.
    """
    _check_which(which)
    if variant not in ("corrected", "printed"):
        raise ValueError("variant must be 'corrected' or 'printed'")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    p, q, d = a * a + c * c, b * b + c * c, a * a - b * b
    cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
    Av = d * cv**2 + p * sv**2
    Bu = q * cu**2 + p * su**2
    if which == "F1":
        root = math.sqrt(a * a + b * b) if variant == "printed" else math.sqrt(p)
        x = cu**3 * d / (a * root) * np.sqrt(Av)
        y = -su**3 * sv * d / b
        z = cv / (c * math.sqrt(p)) * Bu**1.5
    else:
        x = cu / (a * math.sqrt(p)) * Av**1.5
        y = su * sv**3 * q / b
        z = q * cv**3 / (c * math.sqrt(p)) * np.sqrt(Bu)
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def focal_closed_form(a: float, b: float, c: float, which: str = "F1",
                      grid: Optional[GridSpec] = None, variant: str = "printed",
                      chart_variant: str = "U1") -> FocalSheet:
    """Closed-form focal sheet of the ellipsoid sampled on the principal chart grid."""
    _check_which(which)
    if not (a > b > 0 and c > 0):
        raise ParamError("the closed-form focal sheets need a > b > 0 and c > 0")
    chart = Q.global_principal_chart(a, b, c, chart_variant)
    grid = grid or GridSpec()
    us, vs, periodic = grid.axes(chart)
    U, V = np.meshgrid(us, vs, indexing="ij")
    P = focal_closed_form_point(a, b, c, which, U, V, variant)
    ok = np.all(np.isfinite(P), axis=-1)

    def evaluator(u, v):
        return focal_closed_form_point(a, b, c, which, u, v, variant)

    return FocalSheet(which, (U, V), P, ok, chart=chart, source=f"closed-form:{variant}",
                      evaluator=evaluator, periodic=periodic)


def singular_indicator(sheet: FocalSheet, U=None, V=None, h: Optional[float] = None):
    """Signed rank indicator of the focal map at grid nodes.

    The sheet partials P_u, P_v are taken by central differences of the sheet
    evaluator. Off the singular set their cross product is parallel to n x w,
    with w the other principal tangent. That reference vanishes where w is
    lightlike, so it is multiplied by the sign of I(w); the product changes
    sign only where the focal map drops rank.
    """
    if sheet.evaluator is None or sheet.chart is None:
        raise ValueError("the sheet has no evaluator attached")
    if U is None:
        U, V = sheet.grid_uv
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if h is None:
        h = 1e-6 * max(1.0, sheet.chart.domain.diameter)
    labeling = "coordinate" if sheet.source.startswith("closed-form") else "auto"
    with np.errstate(all="ignore"):
        Pu = (sheet.evaluator(U + h, V) - sheet.evaluator(U - h, V)) / (2 * h)
        Pv = (sheet.evaluator(U, V + h) - sheet.evaluator(U, V - h)) / (2 * h)
        _, _, n, w, Iw = _centres(sheet.chart, U, V, sheet.which, labeling, with_frame=True)
        ref = np.cross(n, w)
        val = np.sign(Iw) * np.einsum("...i,...i->...", np.cross(Pu, Pv), ref)
        scale = (np.linalg.norm(Pu, axis=-1) * np.linalg.norm(Pv, axis=-1)
                 * np.linalg.norm(ref, axis=-1))
        return val / np.where(scale > 0, scale, np.nan)


def focal_singular_locus(sheet: FocalSheet, glue_tol: Optional[float] = None) -> list:
    """Singular curves of a focal sheet as zero contours of the rank indicator.

    The result is also stored on ``sheet.singular_points``. A sheet with no
    valid nodes (a plane, say) gives an empty list.
    """
    if not sheet.valid.any() or sheet.evaluator is None:
        sheet.singular_points = []
        return []
    U, V = sheet.grid_uv
    vals = singular_indicator(sheet, U, V)
    vals = np.where(sheet.valid, vals, np.nan)
    finite = vals[np.isfinite(vals)]
    if finite.size == 0 or finite.min() >= 0 or finite.max() <= 0:
        sheet.singular_points = []
        return []

    def func(u, v):
        r = singular_indicator(sheet, np.array(u), np.array(v))
        return float(r)

    raw = zero_contours(U, V, vals, func=func, periodic=sheet.periodic)
    pieces = []
    for pts, closed in raw:
        xyz = sheet.evaluator(pts[:, 0], pts[:, 1])
        if closed:
            pts = np.vstack([pts, pts[:1]])
            xyz = np.vstack([xyz, xyz[:1]])
        pieces.append((xyz, [tuple(p) for p in pts], closed))
    P = sheet.points_xyz[sheet.valid]
    scale = float(np.max(np.abs(P))) if P.size else 1.0
    tol = glue_tol if glue_tol is not None else 1e-6 * max(scale, 1.0)
    closed_pieces = [(x, p, True) for x, p, c in pieces if c]
    glued = glue_polylines([(x, p) for x, p, c in pieces if not c], tol)
    out = [LocusCurve(f"focal-{sheet.which}", np.array(pl, dtype=float), np.asarray(x), bool(cl))
           for x, pl, cl in closed_pieces + glued]
    sheet.singular_points = out
    return out


def compare_sheets(numeric: FocalSheet, reference: FocalSheet, exclude=None):
    """Largest relative gap between two sheets on their common valid nodes.

    ``exclude`` is an optional boolean mask of nodes to skip. The gap is
    measured against the largest coordinate magnitude of the reference.
    """
    mask = numeric.valid & reference.valid
    if exclude is not None:
        mask &= ~np.asarray(exclude, dtype=bool)
    if not mask.any():
        return math.nan
    diff = np.linalg.norm(numeric.points_xyz[mask] - reference.points_xyz[mask], axis=-1)
    ref = np.max(np.linalg.norm(reference.points_xyz[mask], axis=-1))
    return float(np.max(diff) / max(ref, 1e-300))
