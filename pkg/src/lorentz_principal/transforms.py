"""Inversion in a point of R^{2,1} and a harness checking that it maps
curvature lines to curvature lines.

I_q(p) = (p - q) / <p - q, p - q>. The map blows up on the whole lightcone of
q, so every evaluation first checks the relative cone distance
|<d, d>| > guard * |d|^2 with d = p - q.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import jets as J
from .atlas import Atlas
from .bde import IntegrationOptions, bde_coefficients, integrate_on_atlas, point_coefficients
from .errors import LightconeError, LorentzPrincipalError
from .jets import ChartSpec
from .minkowski import as_vec, minkowski_dot

LIGHTCONE_GUARD = 1e-8


@dataclass(frozen=True)
class InversionCenter:
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", as_vec(self.q))

    def __iter__(self):
        return iter(self.q)


def _center(q) -> np.ndarray:
    return q.q if isinstance(q, InversionCenter) else as_vec(q)


def _check_cone(s, d2, guard):
    bad = ~(np.abs(s) > guard * d2)
    if np.any(bad):
        raise LightconeError("point lies on (or too close to) the lightcone of the inversion centre")


def invert_point(q, p, guard: float = LIGHTCONE_GUARD) -> np.ndarray:
    """I_q(p) for one point or an array of points (last axis of length 3)."""
    qv = _center(q)
    d = np.asarray(p, dtype=float) - qv
    s = minkowski_dot(d, d)
    _check_cone(s, np.sum(d * d, axis=-1), guard)
    return d / np.asarray(s)[..., None]


def uninvert_point(q, y, guard: float = LIGHTCONE_GUARD) -> np.ndarray:
    """Inverse of :func:`invert_point`: p = q + y / <y, y>.

    For q = 0 this is I_q itself, so I_0 is an involution.
    """
    qv = _center(q)
    y = np.asarray(y, dtype=float)
    s = minkowski_dot(y, y)
    _check_cone(s, np.sum(y * y, axis=-1), guard)
    return qv + y / np.asarray(s)[..., None]


def invert_chart(q, chart: ChartSpec, guard: float = LIGHTCONE_GUARD) -> ChartSpec:
    """Chart of the inverted surface, with 2-jets carried through I_q.

    Single-point evaluation raises :class:`LightconeError` near the cone;
    array evaluation marks those samples NaN instead.
    """
    qv = _center(q)

    def func(u, v):
        x, y, z = (J.lift(c) for c in chart.func(u, v))
        dx, dy, dz = x - qv[0], y - qv[1], z - qv[2]
        s = dx * dx + dy * dy - dz * dz
        d2 = dx.val ** 2 + dy.val ** 2 + dz.val ** 2
        bad = ~(np.abs(s.val) > guard * d2)
        if np.any(bad):
            if np.ndim(bad) == 0:
                raise LightconeError("chart point lies on the lightcone of the inversion centre")
            mask = np.where(bad, np.nan, 1.0)
            s = s * mask
        r = J.reciprocal(s)
        return dx * r, dy * r, dz * r

    inverse = None
    if chart.inverse is not None:
        def inverse(xyz):
            try:
                p = uninvert_point(qv, xyz, guard)
            except LightconeError:
                return None
            return chart.inverse(p)

    return ChartSpec(chart.kind + "-inverted", dict(chart.params, qx=qv[0], qy=qv[1], qz=qv[2]),
                     chart.domain, func, inverse=inverse, name=f"{chart.name}@inv",
                     margin=chart.margin)


def invert_atlas(q, atlas: Atlas, guard: float = LIGHTCONE_GUARD) -> Atlas:
    return Atlas(tuple(invert_chart(q, ch, guard) for ch in atlas.charts),
                 name=f"{atlas.name}@inv")


def coefficient_ratio(q, chart: ChartSpec, U, V):
    """Pipeline (L, M, N) of the inverted chart over the original ones.

    Returns ``(ratio, factor)`` where ``ratio`` has shape S + (3,) and
    ``factor`` = <X - q, X - q>^{-5}; the two agree up to a global sign fixed
    by the orientation reversal of the inversion.
    """
    qv = _center(q)
    U, V = np.broadcast_arrays(np.asarray(U, float), np.asarray(V, float))
    jo = J.eval_jet_grid(chart, U, V)
    ji = J.eval_jet_grid(invert_chart(qv, chart), U, V)
    Lo, Mo, No, _, _ = bde_coefficients(jo)
    Li, Mi, Ni, _, _ = bde_coefficients(ji)
    d = jo.X - qv
    s = minkowski_dot(d, d)
    with np.errstate(all="ignore"):
        ratio = np.stack([Li / Lo, Mi / Mo, Ni / No], axis=-1)
    return ratio, s ** -5.0


def coefficient_proportionality_residual(q, chart: ChartSpec, U, V, sign: float = -1.0) -> float:
    """max |(L, M, N)_inv - sign * <X-q, X-q>^{-5} (L, M, N)| relative to |(L, M, N)_inv|."""
    qv = _center(q)
    U, V = np.broadcast_arrays(np.asarray(U, float), np.asarray(V, float))
    jo = J.eval_jet_grid(chart, U, V)
    ji = J.eval_jet_grid(invert_chart(qv, chart), U, V)
    co = np.stack(bde_coefficients(jo)[:3], axis=-1)
    ci = np.stack(bde_coefficients(ji)[:3], axis=-1)
    d = jo.X - qv
    fac = (minkowski_dot(d, d) ** -5.0)[..., None]
    err = np.linalg.norm(ci - sign * fac * co, axis=-1)
    ref = np.linalg.norm(ci, axis=-1)
    ok = np.isfinite(err) & (ref > 0)
    return float(np.max(err[ok] / ref[ok]))


# ---------------------------------------------------------------------------
# polyline distances

_SPLINE_T = np.linspace(0.0, 1.0, 257)


def _catmull_rom(P, i, t):
    """Uniform Catmull-Rom points between P[i] and P[i + 1] (i and t broadcast)."""
    n = len(P)
    i = np.asarray(i)
    p0 = P[np.maximum(i - 1, 0)]
    p1 = P[i]
    p2 = P[i + 1]
    p3 = P[np.minimum(i + 2, n - 1)]
    t = np.asarray(t)[..., None]
    t2, t3 = t * t, t * t * t
    return 0.5 * ((2 * p1) + (-p0 + p2) * t + (2 * p0 - 5 * p1 + 4 * p2 - p3) * t2
                  + (-p0 + 3 * p1 - 3 * p2 + p3) * t3)


def _spline_distances(Z, P):
    """Distance from each row of Z to the cubic spline through the vertices P.

    The nearest chord is found first and the spline pieces next to it are
    sampled densely, which removes the chord sagitta error.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    P = np.asarray(P, dtype=float)
    a, ab = P[:-1], np.diff(P, axis=0)
    L2 = np.einsum("ij,ij->i", ab, ab)
    out = np.empty(len(Z))
    for k0 in range(0, len(Z), 256):
        Zc = Z[k0:k0 + 256]
        w = Zc[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("kij,ij->ki", w, ab) / np.where(L2 > 0, L2, 1.0), 0, 1)
        d = np.linalg.norm(w - t[..., None] * ab, axis=-1)
        i0 = np.argmin(d, axis=1)
        best = d[np.arange(len(Zc)), i0]
        for off in (-1, 0, 1):
            i = i0 + off
            ok = (i >= 0) & (i < len(P) - 1)
            ii = np.clip(i, 0, len(P) - 2)
            S = _catmull_rom(P, ii[:, None], _SPLINE_T[None, :])
            ds = np.linalg.norm(S - Zc[:, None, :], axis=-1).min(axis=1)
            best = np.where(ok, np.minimum(best, ds), best)
        out[k0:k0 + 256] = best
    return out


def point_to_polyline(z, P) -> float:
    """Distance from ``z`` to the cubic spline through the vertices ``P``."""
    return float(_spline_distances(z, P)[0])


def one_sided_hausdorff(A, B) -> float:
    """max over a in A of the distance from a to the curve through B."""
    return float(np.max(_spline_distances(A, B)))


# ---------------------------------------------------------------------------
# verification harness

@dataclass
class SeedReport:
    seed: tuple
    foliation: str = ""
    distance: float = math.nan
    passed: bool = False
    closed_original: bool = False
    closed_inverted: bool = False
    error: str = ""


@dataclass
class InversionReport:
    center: tuple
    scale: float
    threshold: float
    max_distance: float
    passed: bool
    seeds: list = field(default_factory=list)
    coefficient_residual: Optional[float] = None

    def as_dict(self):
        return {
            "center": [float(x) for x in self.center],
            "scale": self.scale,
            "threshold": self.threshold,
            "max_distance": self.max_distance,
            "passed": self.passed,
            "coefficient_residual": self.coefficient_residual,
            "seeds": [
                {"seed": [float(x) for x in r.seed], "foliation": r.foliation,
                 "distance": r.distance, "passed": r.passed,
                 "closed_original": r.closed_original, "closed_inverted": r.closed_inverted,
                 "error": r.error}
                for r in self.seeds
            ],
        }


def _tangent_image(qv, p, t):
    """Differential of I_q at p applied to the tangent vector t."""
    d = p - qv
    s = minkowski_dot(d, d)
    return t / s - 2.0 * minkowski_dot(d, t) * d / (s * s)


def _as_atlas(surface) -> Atlas:
    if isinstance(surface, Atlas):
        return surface
    if isinstance(surface, ChartSpec):
        if surface.inverse is None:
            raise ValueError("a chart needs an inverse to be verified")
        return Atlas((surface,), name=surface.name)
    raise TypeError("expected a ChartSpec or an Atlas")


def _umbilic_pair(atlas, inv_atlas, qv, seed, tol) -> bool:
    """True when the seed and its image are both umbilic-like points."""
    res = []
    for atl, p in ((atlas, seed), (inv_atlas, invert_point(qv, seed))):
        ci, uv = atl.locate(p)
        pc = point_coefficients(atl.charts[ci], *uv)
        if pc is None:
            return False
        res.append(max(abs(pc[0]), abs(pc[1]), abs(pc[2])) <= tol * pc[3])
    return all(res)


def _on_surface(atlas: Atlas, p, tol) -> bool:
    try:
        ci, uv = atlas.locate(p)
    except LorentzPrincipalError:
        return False
    return float(np.linalg.norm(atlas.charts[ci].point(*uv) - p)) <= tol


def verify_inversion_invariance(surface: Union[ChartSpec, Atlas], q, seeds: Sequence,
                                foliation: str = "F1", opts: Optional[IntegrationOptions] = None,
                                rel_threshold: float = 1e-4) -> InversionReport:
    """Compare inverted leaves with leaves integrated on the inverted surface.

    For every seed (a point of the surface) a principal line is integrated on
    S and mapped by I_q. Independently, a principal line is integrated on S_q
    from I_q(seed); of its two foliations the one tangent to the mapped seed
    direction is used. The one-sided Hausdorff distance from the mapped leaf
    to the S_q leaf must stay below ``rel_threshold`` times the scene scale,
    the bounding-box diagonal of all mapped leaves. Leaves are sampled with a
    small step by default because the distance is measured to an interpolating
    spline through the vertices. A centre lying on S is
    reported as a failed precondition for every seed. Seeds that are umbilic
    on S pass when their images are umbilic on S_q, since every curve through
    such a point is principal.
    """
    qv = _center(q)
    # leaves are compared as interpolated polylines, so sample them finely
    opts = opts or IntegrationOptions(max_step_frac=0.002)
    atlas = _as_atlas(surface)
    inv_atlas = invert_atlas(qv, atlas)
    reports = []
    pairs = []
    umbilic_reports = []
    centre_on_surface = _on_surface(atlas, qv, 1e-7 * max(1.0, atlas.diameter))
    for seed in seeds:
        seed = as_vec(seed)
        rep = SeedReport(tuple(seed), foliation)
        reports.append(rep)
        if centre_on_surface:
            rep.error = "inversion centre lies on the surface"
            continue
        try:
            if _umbilic_pair(atlas, inv_atlas, qv, seed, opts.coef_tol):
                # every direction is principal on both sides, so any curve matches
                rep.foliation = f"{foliation}->any"
                rep.error = "umbilic seed: image is umbilic as well"
                umbilic_reports.append(rep)
                continue
            leaf = integrate_on_atlas(atlas, seed, foliation, opts)
            mapped = invert_point(qv, leaf.points_xyz)
            t0 = leaf.points_xyz[1] - leaf.points_xyz[0]
            t_img = _tangent_image(qv, leaf.points_xyz[0], t0)
            seed_img = invert_point(qv, seed)
            best = None
            for fol in ("F1", "F2"):
                other = integrate_on_atlas(inv_atlas, seed_img, fol, opts)
                d1 = other.points_xyz[1] - other.points_xyz[0]
                c = abs(np.dot(d1, t_img)) / (np.linalg.norm(d1) * np.linalg.norm(t_img))
                if best is None or c > best[0]:
                    best = (c, fol, other)
            _, fol_q, other = best
            rep.foliation = f"{foliation}->{fol_q}"
            rep.closed_original = leaf.closed
            rep.closed_inverted = other.closed
            pairs.append((rep, mapped, other.points_xyz))
        except LorentzPrincipalError as exc:
            rep.error = f"{type(exc).__name__}: {exc}"
    allpts = [m for _, m, _ in pairs]
    if allpts:
        P = np.vstack(allpts)
        scale = float(np.linalg.norm(P.max(axis=0) - P.min(axis=0)))
    else:
        scale = math.nan
    if not np.isfinite(scale) and umbilic_reports:
        imgs = invert_point(qv, np.array([r.seed for r in umbilic_reports]))
        scale = float(np.linalg.norm(imgs.max(axis=0) - imgs.min(axis=0))) or 1.0
    thr = rel_threshold * scale if np.isfinite(scale) else math.nan
    for rep, mapped, other in pairs:
        rep.distance = one_sided_hausdorff(mapped, other)
        rep.passed = bool(rep.distance <= thr)
    for rep in umbilic_reports:
        rep.distance = 0.0
        rep.passed = True
    dists = [r.distance for r in reports if np.isfinite(r.distance)]
    max_d = max(dists) if dists else math.nan
    passed = bool(reports) and all(r.passed for r in reports)
    return InversionReport(tuple(qv), scale, thr, max_d, passed, reports)
