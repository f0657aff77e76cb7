"""Umbilic points: location, Lie-Cartan classification and separatrices.

Near an umbilic the curvature-line equation is lifted to the surface
F(u, v, p) = L p^2 + M p + N = 0 with p = dv/du, carrying the line field
Y = (F_p, p F_p, -(F_u + p F_v)). The complementary chart q = du/dv uses
G = L + M q + N q^2 and Z = (q G_q, G_q, -(q G_u + G_v)). At an umbilic
F_p vanishes on the whole fiber, so the singular points of Y are the roots of
the cubic F_u + p F_v, and the restricted linearisation has eigenvalues

    lambda1 = F_pu + p F_pv,    lambda2 = -(lambda1 + F_v).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .atlas import Atlas
from .bde import (GridSpec, IntegrationOptions, PrincipalCurve, _images, integrate_on_atlas,
                  integrate_principal_line, point_coefficients)
from .errors import DegenerateLinearizationError, NotDarbouxianError
from .jets import ChartSpec, Jet, eval_jet_grid, lift
from .surface import bde_coefficients


class Darboux(enum.Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    CENTER = "Center"
    NON_DARBOUXIAN = "NonDarbouxian"


class SingularityKind(enum.Enum):
    SADDLE = "Saddle"
    NODE = "Node"
    FOCUS = "Focus"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class LieCartanSingularity:
    p_or_q: float
    chart: str  # "P" or "Q"
    eigenvalues: tuple
    kind: SingularityKind
    residual: float = 0.0

    @property
    def direction(self) -> np.ndarray:
        """Unit (du, dv) direction of the singular fiber point."""
        d = np.array([1.0, self.p_or_q]) if self.chart == "P" else np.array([self.p_or_q, 1.0])
        return d / np.linalg.norm(d)


@dataclass(frozen=True)
class UmbilicRecord:
    uv: tuple
    xyz: np.ndarray
    causal: str
    residual: float
    chart: str = ""
    chart_index: Optional[int] = None
    singularities: tuple = ()
    darboux: Optional[Darboux] = None

    def as_dict(self) -> dict:
        return {
            "uv": [float(self.uv[0]), float(self.uv[1])],
            "xyz": [float(t) for t in self.xyz],
            "causal": self.causal,
            "chart": self.chart,
            "residual": float(self.residual),
            "darboux": self.darboux.value if self.darboux else None,
            "singularities": [
                {"chart": s.chart, "slope": float(s.p_or_q), "kind": s.kind.value,
                 "eigenvalues": [float(e) for e in s.eigenvalues]}
                for s in self.singularities
            ],
        }


# ---------------------------------------------------------------------------
# location

def _residual_grid(chart: ChartSpec, U, V):
    jet = eval_jet_grid(chart, U, V)
    L, M, N, scale, detI = bde_coefficients(jet)
    with np.errstate(all="ignore"):
        r = np.sqrt(L * L + M * M + N * N) / scale
    dom = chart.domain
    if dom.inside is not None:
        mask = np.vectorize(lambda a, b: bool(dom.inside(a, b)))(U, V)
        r = np.where(mask, r, np.nan)
    return r


def _jacobian(chart, u, v, h):
    rows = []
    for du, dv in ((h, 0.0), (0.0, h)):
        a = point_coefficients(chart, u + du, v + dv)
        b = point_coefficients(chart, u - du, v - dv)
        if a is None or b is None:
            return None
        rows.append([(a[i] - b[i]) / (2 * h) for i in range(3)])
    return np.array(rows).T  # 3 x 2


def polish_umbilic(chart: ChartSpec, uv, tol: float = 1e-9, max_iter: int = 120):
    """Damped Newton on the best-conditioned pair of (L, M, N).

    Iterates until the step stalls, so that degenerate (non-simple) zeros,
    where Newton only converges linearly, are still located accurately.
    Returns ``(uv, residual)`` where residual = max|coef| / scale, or None
    when the iteration leaves the chart or diverges.
    """
    u, v = float(uv[0]), float(uv[1])
    h = 1e-6 * chart.diameter
    for _ in range(max_iter):
        pc = point_coefficients(chart, u, v)
        if pc is None:
            return None
        c = np.array(pc[:3])
        scale = pc[3]
        res = float(np.max(np.abs(c))) / scale if scale > 0 else math.inf
        if res <= 1e-17:
            break
        Jm = _jacobian(chart, u, v, h)
        if Jm is None:
            return None
        best = None
        for i, j in ((0, 1), (0, 2), (1, 2)):
            d = Jm[i, 0] * Jm[j, 1] - Jm[i, 1] * Jm[j, 0]
            if best is None or abs(d) > abs(best[0]):
                best = (d, i, j)
        d, i, j = best
        if d == 0:
            return None
        step = np.linalg.solve(Jm[[i, j]], -c[[i, j]])
        lam = 1.0
        base = float(np.linalg.norm(c))
        for _ in range(30):
            pn = point_coefficients(chart, u + lam * step[0], v + lam * step[1])
            if pn is not None and np.linalg.norm(pn[:3]) < base:
                break
            lam *= 0.5
        else:
            break
        u, v = u + lam * step[0], v + lam * step[1]
        if np.hypot(*step) * lam < 1e-15 * chart.diameter:
            break
    pc = point_coefficients(chart, u, v)
    if pc is None or pc[3] <= 0:
        return None
    res = float(np.max(np.abs(pc[:3]))) / pc[3]
    return (u, v), res


def _make_record(chart, uv, res, index=None):
    pc = point_coefficients(chart, *uv)
    xu, xv = pc[5], pc[6]
    E = xu[0] ** 2 + xu[1] ** 2 - xu[2] ** 2
    F = xu[0] * xv[0] + xu[1] * xv[1] - xu[2] * xv[2]
    G = xv[0] ** 2 + xv[1] ** 2 - xv[2] ** 2
    causal = "SpacelikeUmbilic" if E * G - F * F > 0 else "TimelikeUmbilic"
    return UmbilicRecord((float(uv[0]), float(uv[1])), pc[4], causal, res, chart.name, index)


def find_umbilics(chart: ChartSpec, grid: Optional[GridSpec] = None, tol: float = 1e-9,
                  threshold: float = 0.05, classify: bool = False) -> list:
    """Umbilics of ``chart``: scan, Newton polish, merge, sort by (u, v).

    Local minima of the scale-free residual |(L, M, N)| / scale below
    ``threshold`` seed the Newton iteration; only points whose polished
    residual is at most ``tol`` are kept.
    """
    grid = grid or GridSpec()
    us, vs, periodic = grid.axes(chart)
    U, V = np.meshgrid(us, vs, indexing="ij")
    r = _residual_grid(chart, U, V)
    R = np.where(np.isfinite(r), r, np.inf)
    P = np.pad(R, 1, mode="constant", constant_values=np.inf)
    if periodic[0]:
        P[0, 1:-1], P[-1, 1:-1] = R[-1], R[0]
    if periodic[1]:
        P[1:-1, 0], P[1:-1, -1] = R[:, -1], R[:, 0]
    is_min = np.isfinite(R) & (R < threshold)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = P[1 + di:1 + di + R.shape[0], 1 + dj:1 + dj + R.shape[1]]
            # minima must be strict interior nodes with a full neighbourhood
            is_min &= (R <= nb) & np.isfinite(nb)
    found = []
    dom = chart.domain
    for i, j in zip(*np.nonzero(is_min)):
        out = polish_umbilic(chart, (U[i, j], V[i, j]), tol)
        if out is None:
            continue
        (u, v), res = out
        if res > tol:
            continue
        u, v, _ = dom.normalize(u, v)
        if not dom.contains(u, v):
            continue
        dup = False
        for (a, b), _r in found:
            if any(math.hypot(a - x, b - y) <= 1e-6 for (x, y, _) in _images(dom, u, v)):
                dup = True
                break
        if not dup:
            found.append(((u, v), res))
    found.sort(key=lambda t: (round(t[0][0], 9), round(t[0][1], 9)))
    recs = [_make_record(chart, uv, res) for uv, res in found]
    if classify:
        recs = [classify_umbilic(chart, rec) for rec in recs]
    return recs


def find_umbilics_atlas(atlas: Atlas, grid: Optional[GridSpec] = None, tol: float = 1e-9,
                        classify: bool = False, merge_tol: float = 1e-6) -> list:
    """Umbilics over all charts of an atlas, merged in 3D and sorted by xyz.

    Each umbilic is re-polished and reported in the chart where it lies deepest.
    """
    pts = []
    for ch in atlas.charts:
        for rec in find_umbilics(ch, grid, tol):
            if not any(np.linalg.norm(rec.xyz - p) <= merge_tol * max(1.0, np.linalg.norm(p))
                       for p in pts):
                pts.append(rec.xyz)
    recs = []
    for p in pts:
        ci, uv = atlas.locate(p)
        ch = atlas.charts[ci]
        out = polish_umbilic(ch, uv, tol)
        if out is None or out[1] > tol:
            continue
        rec = _make_record(ch, out[0], out[1], ci)
        if classify:
            rec = classify_umbilic(ch, rec)
        recs.append(rec)
    recs.sort(key=lambda r: tuple(round(float(t), 9) for t in r.xyz))
    return recs


# ---------------------------------------------------------------------------
# classification

def coefficient_derivatives(chart: ChartSpec, uv, source: str = "auto"):
    """First and second partials of (L, M, N) at ``uv``.

    Returns a dict with arrays 'c', 'u', 'v', 'uu', 'uv', 'vv' (each length 3)
    and the source used. With a closed-form equation the derivatives come from
    jet arithmetic; otherwise from central differences of the exact pipeline
    coefficients.
    """
    u, v = float(uv[0]), float(uv[1])
    use_closed = chart.closed_form_bde is not None and source in ("auto", "closed_form")
    if source == "closed_form" and chart.closed_form_bde is None:
        raise ValueError(f"chart {chart.name} has no closed-form equation")
    if use_closed:
        cs = [lift(c) for c in chart.closed_form_bde(Jet.var_u(u), Jet.var_v(v))]
        out = {k: np.array([getattr(c, a) for c in cs], dtype=float)
               for k, a in (("c", "val"), ("u", "du"), ("v", "dv"), ("uu", "duu"),
                            ("uv", "duv"), ("vv", "dvv"))}
        out["source"] = "closed_form"
        return out
    h = 1e-4 * chart.diameter

    def C(a, b):
        pc = point_coefficients(chart, a, b)
        if pc is None:
            raise DegenerateLinearizationError("chart not smooth near the umbilic")
        return np.array(pc[:3])

    c0 = C(u, v)
    cpu, cmu, cpv, cmv = C(u + h, v), C(u - h, v), C(u, v + h), C(u, v - h)
    cpp, cpm, cmp_, cmm = C(u + h, v + h), C(u + h, v - h), C(u - h, v + h), C(u - h, v - h)
    return {
        "c": c0,
        "u": (cpu - cmu) / (2 * h),
        "v": (cpv - cmv) / (2 * h),
        "uu": (cpu - 2 * c0 + cmu) / (h * h),
        "vv": (cpv - 2 * c0 + cmv) / (h * h),
        "uv": (cpp - cpm - cmp_ + cmm) / (4 * h * h),
        "source": "pipeline",
    }


def _real_roots(coeffs, bound, strict):
    """Real roots of a polynomial (highest degree first) with |x| <= bound."""
    c = np.array(coeffs, dtype=float)
    big = np.max(np.abs(c)) if c.size else 0.0
    if big == 0:
        return []
    while c.size and abs(c[0]) <= 1e-14 * big:
        c = c[1:]
    if c.size <= 1:
        return []
    roots = np.roots(c)
    out = []
    for z in roots:
        if abs(z.imag) <= 1e-7 * (1 + abs(z.real)):
            x = float(z.real)
            # one Newton polish
            pv = np.polyval(c, x)
            dp = np.polyval(np.polyder(c), x)
            if dp != 0:
                x -= pv / dp
            if (abs(x) < bound) if strict else (abs(x) <= bound):
                out.append(x)
    return sorted(out)


def lie_cartan_singularities(der: dict, eig_tol: float = 1e-8):
    """Singular points of the lifted field over an umbilic, glued over both charts."""
    Lu, Mu, Nu = der["u"]
    Lv, Mv, Nv = der["v"]
    scale = float(max(np.max(np.abs(der["u"])), np.max(np.abs(der["v"]))))
    sings = []
    # p chart: F = L p^2 + M p + N
    for p in _real_roots([Lv, Lu + Mv, Mu + Nv, Nu], 1.0, strict=False):
        Fv = Lv * p * p + Mv * p + Nv
        lam1 = (2 * Lu * p + Mu) + p * (2 * Lv * p + Mv)
        lam2 = -(lam1 + Fv)
        res = abs(((Lv * p + Lu + Mv) * p + Mu + Nv) * p + Nu)
        sings.append(_make_sing(p, "P", lam1, lam2, scale, eig_tol, res))
    # q chart: G = L + M q + N q^2 ; only |q| < 1 to avoid double counting
    for q in _real_roots([Nu, Mu + Nv, Lu + Mv, Lv], 1.0, strict=True):
        Gu = Lu + Mu * q + Nu * q * q
        lam1 = (Mv + 2 * q * Nv) + q * (Mu + 2 * q * Nu)
        lam2 = -(lam1 + Gu)
        res = abs(((Nu * q + Mu + Nv) * q + Lu + Mv) * q + Lv)
        sings.append(_make_sing(q, "Q", lam1, lam2, scale, eig_tol, res))
    return sings


def _make_sing(x, chart, l1, l2, scale, eig_tol, res):
    if min(abs(l1), abs(l2)) < eig_tol * scale:
        kind = SingularityKind.DEGENERATE
    elif l1 * l2 < 0:
        kind = SingularityKind.SADDLE
    else:
        kind = SingularityKind.NODE
    return LieCartanSingularity(float(x), chart, (float(l1), float(l2)), kind, float(res))


def classify_umbilic(chart: ChartSpec, rec: UmbilicRecord, source: str = "auto",
                     strict: bool = False, center_tol: float = 1e-6) -> UmbilicRecord:
    """Fill in Lie-Cartan singularities and the Darbouxian type of ``rec``.

    Center is reported when all first derivatives of (L, M, N) vanish relative
    to the second ones, so every fiber point is singular. Non-hyperbolic
    singularities give NonDarbouxian (or raise with ``strict=True``).
    """
    der = coefficient_derivatives(chart, rec.uv, source)
    first = max(np.max(np.abs(der["u"])), np.max(np.abs(der["v"])))
    second = max(np.max(np.abs(der[k])) for k in ("uu", "uv", "vv"))
    if first <= center_tol * max(second, 1e-300) or first == 0.0:
        return replace(rec, singularities=(), darboux=Darboux.CENTER)
    sings = lie_cartan_singularities(der)
    kinds = [s.kind for s in sings]
    if SingularityKind.DEGENERATE in kinds:
        if strict:
            raise DegenerateLinearizationError("non-hyperbolic Lie-Cartan singularity")
        dtype = Darboux.NON_DARBOUXIAN
    else:
        saddles = kinds.count(SingularityKind.SADDLE)
        if len(sings) == 1 and saddles == 1:
            dtype = Darboux.D1
        elif len(sings) == 3 and saddles == 3:
            dtype = Darboux.D3
        elif len(sings) == 3 and saddles == 2:
            dtype = Darboux.D2
        else:
            dtype = Darboux.NON_DARBOUXIAN
    return replace(rec, singularities=tuple(sings), darboux=dtype)


# ---------------------------------------------------------------------------
# separatrices

def separatrix_directions(rec: UmbilicRecord):
    """Parameter directions of the saddle separatrices (both rays of each)."""
    out = []
    for s in rec.singularities:
        if s.kind is SingularityKind.SADDLE:
            d = s.direction
            out += [d, -d]
    return out


def trace_separatrices(chart: ChartSpec, rec: UmbilicRecord, atlas: Optional[Atlas] = None,
                       umbilics=(), opts: Optional[IntegrationOptions] = None,
                       delta_frac: float = 1e-4) -> list:
    """Principal lines leaving ``rec`` along its saddle directions.

    Each leaf starts at rec.uv + delta * d (delta = 1e-4 of the chart
    diameter) and is continued across ``atlas`` when one is given. The
    umbilic itself is prepended to every returned polyline.
    """
    if rec.darboux not in (Darboux.D1, Darboux.D2, Darboux.D3):
        raise NotDarbouxianError(f"umbilic of type {rec.darboux} has no separatrices")
    opts = opts or IntegrationOptions()
    delta = delta_frac * chart.diameter
    curves = []
    umb_xyz = [np.asarray(r.xyz if isinstance(r, UmbilicRecord) else r, dtype=float)
               for r in umbilics]
    own = None
    for k, z in enumerate(umb_xyz):
        if np.linalg.norm(z - rec.xyz) <= 1e-6 * max(1.0, np.linalg.norm(z)):
            own = k
    if own is None:
        umb_xyz.append(np.asarray(rec.xyz, dtype=float))
        own = len(umb_xyz) - 1
    for d in separatrix_directions(rec):
        uv0 = np.array(rec.uv) + delta * d
        pc = point_coefficients(chart, *uv0)
        t3 = d[0] * pc[5] + d[1] * pc[6]
        if atlas is not None:
            grace = 4 * opts.umbilic_radius_frac * atlas.diameter
            c = integrate_on_atlas(atlas, pc[4], opts=replace(opts, detect_closure=False),
                                   umbilics=umb_xyz, initial_tangent=t3,
                                   grace_umbilic=own, grace_length=grace)
        else:
            others = [z for k, z in enumerate(umb_xyz) if k != own]
            c = integrate_principal_line(chart, uv0, opts=replace(opts, detect_closure=False),
                                         umbilics=others, initial_direction=d)
        c.points_xyz = np.vstack([np.asarray(rec.xyz)[None, :], c.points_xyz])
        c.points_uv = np.vstack([np.array(rec.uv)[None, :], c.points_uv])
        if c.chart_index is not None:
            c.chart_index = np.concatenate([[c.chart_index[0]], c.chart_index])
        curves.append(c)
    return curves
