"""Principal directions from the curvature-line BDE and their integration.

The binary differential equation L dv^2 + M du dv + N du^2 = 0 (coefficients
from :mod:`surface`) is solved projectively for (du : dv). Leaves of the two
principal foliations are integrated with an adaptive Dormand-Prince 5(4) pair
on the unit direction field in parameter space, continuing the orientation
from step to step.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ._contour import glue_polylines, zero_contours
from .atlas import Atlas, single_chart_atlas
from .errors import SeedAtUmbilicError, SeedOutsideDomainError
from .jets import ChartSpec, Jet, eval_jet_grid, lift
from .surface import FundamentalData, bde_coefficients


class Multiplicity(enum.Enum):
    TWO = "Two"
    ONE = "One"
    NONE = "None"
    UMBILIC_LIKE = "UmbilicLike"


class Termination(enum.Enum):
    CLOSED = "Closed"
    DOMAIN_EXIT = "DomainExit"
    UMBILIC_HIT = "UmbilicHit"
    LPL_HIT = "LPLHit"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class DirectionPair:
    d1: Optional[np.ndarray]
    d2: Optional[np.ndarray]
    discriminant: float
    multiplicity: Multiplicity


def _unit(x, y):
    r = math.hypot(x, y)
    return np.array([x / r, y / r]) if r > 0 else None


def solve_directions(L: float, M: float, N: float, scale: float, tol: float = 1e-9,
                     disc_tol: float = 1e-12) -> DirectionPair:
    """Roots (du : dv) of L dv^2 + M du dv + N du^2 = 0 without dividing by L or N.

    With q = -(M + sign(M) sqrt(D)) / 2 the two roots are (L, q) and (q, N);
    this is the cancellation-free form of the quadratic formula.
    """
    disc = M * M - 4.0 * L * N
    if max(abs(L), abs(M), abs(N)) <= tol * scale:
        return DirectionPair(None, None, disc, Multiplicity.UMBILIC_LIKE)
    band = disc_tol * (M * M + 4.0 * abs(L * N))
    if disc < -band:
        return DirectionPair(None, None, disc, Multiplicity.NONE)
    sq = math.sqrt(max(disc, 0.0))
    q = -0.5 * (M + (sq if M >= 0 else -sq))
    r1 = _unit(L, q)
    r2 = _unit(q, N)
    if disc <= band:
        r = r1 if (r2 is None or (r1 is not None and math.hypot(L, q) >= math.hypot(q, N))) else r2
        return DirectionPair(r, r, disc, Multiplicity.ONE)
    return DirectionPair(r1, r2, disc, Multiplicity.TWO)


def principal_directions(fd: FundamentalData, tol: float = 1e-9) -> DirectionPair:
    """Principal directions at a point, labelled so that d1 belongs to k1.

    Off the tropic and with real curvatures the root with the larger normal
    curvature II/I is returned as d1. Elsewhere the algebraic order is kept.
    """
    dp = solve_directions(fd.L1, fd.M1, fd.N1, fd.scale, tol)
    if dp.multiplicity is not Multiplicity.TWO or fd.degenerate or fd.complex_pair:
        return dp
    kap = []
    for d in (dp.d1, dp.d2):
        I = fd.E * d[0] ** 2 + 2 * fd.F * d[0] * d[1] + fd.G * d[1] ** 2
        II = fd.e * d[0] ** 2 + 2 * fd.f * d[0] * d[1] + fd.g * d[1] ** 2
        if abs(I) <= 1e-12 * (abs(fd.E) + abs(fd.G) + abs(fd.F)):
            return dp
        kap.append(II / I)
    if kap[1] > kap[0]:
        return DirectionPair(dp.d2, dp.d1, dp.discriminant, dp.multiplicity)
    return dp


def direction_residual(L, M, N, d) -> float:
    """|L dv^2 + M du dv + N du^2| / (|(L, M, N)| |d|^2)."""
    du, dv = d
    nrm = math.sqrt(L * L + M * M + N * N) * (du * du + dv * dv)
    return abs(L * dv * dv + M * du * dv + N * du * du) / nrm if nrm > 0 else 0.0


# ---------------------------------------------------------------------------
# fast single-point evaluation used by the integrator

def point_coefficients(chart: ChartSpec, u: float, v: float):
    """(L, M, N, scale, X, Xu, Xv) at one point, or None where the chart is not smooth."""
    with np.errstate(all="ignore"):
        out = chart.func(Jet.var_u(u), Jet.var_v(v))
    jx, jy, jz = (lift(c) for c in out)
    X = (float(jx.val), float(jy.val), float(jz.val))
    xu = (float(jx.du), float(jy.du), float(jz.du))
    xv = (float(jx.dv), float(jy.dv), float(jz.dv))
    xuu = (float(jx.duu), float(jy.duu), float(jz.duu))
    xuv = (float(jx.duv), float(jy.duv), float(jz.duv))
    xvv = (float(jx.dvv), float(jy.dvv), float(jz.dvv))
    vals = X + xu + xv + xuu + xuv + xvv
    if not all(math.isfinite(t) for t in vals):
        return None
    n = (xu[1] * xv[2] - xu[2] * xv[1], xu[2] * xv[0] - xu[0] * xv[2],
         -(xu[0] * xv[1] - xu[1] * xv[0]))

    def dot(a, b):
        return a[0] * b[0] + a[1] * b[1] - a[2] * b[2]

    E, F, G = dot(xu, xu), dot(xu, xv), dot(xv, xv)
    eh, fh, gh = dot(xuu, n), dot(xuv, n), dot(xvv, n)
    nu = math.sqrt(xu[0] ** 2 + xu[1] ** 2 + xu[2] ** 2)
    nv = math.sqrt(xv[0] ** 2 + xv[1] ** 2 + xv[2] ** 2)
    s2 = (math.sqrt(sum(t * t for t in xuu)) + 2 * math.sqrt(sum(t * t for t in xuv))
          + math.sqrt(sum(t * t for t in xvv)))
    scale = (nu * nu + nv * nv) * s2 * nu * nv
    return (F * gh - G * fh, E * gh - G * eh, E * fh - F * eh, scale,
            np.array(X), np.array(xu), np.array(xv))


# ---------------------------------------------------------------------------
# integration

@dataclass(frozen=True)
class IntegrationOptions:
    atol: float = 1e-9
    max_step_frac: float = 0.01
    max_steps: int = 20000
    max_length: Optional[float] = None
    closure_min_steps: int = 10
    closure_cos: float = 0.999
    closure_radius: Optional[float] = None
    umbilic_radius_frac: float = 1e-4
    detect_closure: bool = True
    coef_tol: float = 1e-9

    @property
    def closure_r(self) -> float:
        return self.closure_radius if self.closure_radius is not None else 2.0 * math.sqrt(self.atol)


@dataclass
class PrincipalCurve:
    foliation: str
    points_uv: np.ndarray
    points_xyz: np.ndarray
    closed: bool
    termination: Termination
    steps: int = 0
    length: float = 0.0
    chart_index: Optional[np.ndarray] = None
    chart_name: str = ""

    def __len__(self):
        return len(self.points_xyz)


# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


class _StageFailure(Exception):
    def __init__(self, reason):
        self.reason = reason


def _images(domain, u, v):
    """Parameter points equivalent to (u, v) near the domain, with a flip flag."""
    pts = [(u, v, False)]
    if domain.u_mode == "fold":
        lo, hi = domain.u_range
        pts += [(2 * lo - u, -v, True), (2 * hi - u, -v, True)]
    if domain.v_mode == "fold":
        lo, hi = domain.v_range
        pts += [(-u, 2 * lo - v, True), (-u, 2 * hi - v, True)]
    pu, pv = domain.periods
    out = []
    for (a, b, f) in pts:
        for su in ((-1, 0, 1) if pu else (0,)):
            for sv in ((-1, 0, 1) if pv else (0,)):
                out.append((a + su * (pu or 0.0), b + sv * (pv or 0.0), f))
    return out


@dataclass
class _Target:
    """Closure target: a parameter point with its direction."""

    uv: np.ndarray
    d: np.ndarray


def _hermite(p0, p1, m0, m1, t):
    t2, t3 = t * t, t * t * t
    return ((2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0
            + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * m1)


def _hermite_d(p0, p1, m0, m1, t):
    t2 = t * t
    return ((6 * t2 - 6 * t) * p0 + (3 * t2 - 4 * t + 1) * m0
            + (-6 * t2 + 6 * t) * p1 + (3 * t2 - 2 * t) * m1)


def _segment_distance(p0, p1, z):
    d = p1 - p0
    L2 = float(d @ d)
    t = 0.0 if L2 == 0 else min(1.0, max(0.0, float((z - p0) @ d) / L2))
    return float(np.linalg.norm(p0 + t * d - z))


class _Tracer:
    """Integrates one leaf inside a single chart."""

    def __init__(self, chart: ChartSpec, opts: IntegrationOptions, umbilics_uv=(),
                 grace=None):
        self.chart = chart
        self.dom = chart.domain
        self.opts = opts
        self.diam = self.dom.diameter
        self.h_max = opts.max_step_frac * self.diam
        self.h_min = 1e-10 * self.diam
        self.r_umb = opts.umbilic_radius_frac * self.diam
        self.umb = [np.asarray(p, dtype=float) for p in umbilics_uv]
        # grace = (index, length): ignore that umbilic until we moved this far
        self.grace = grace

    def field(self, u, v, ref):
        pc = point_coefficients(self.chart, u, v)
        if pc is None:
            raise _StageFailure("invalid")
        L, M, N, scale = pc[:4]
        dp = solve_directions(L, M, N, scale, self.opts.coef_tol)
        if dp.multiplicity is Multiplicity.UMBILIC_LIKE:
            raise _StageFailure("umbilic")
        if dp.multiplicity is Multiplicity.NONE:
            raise _StageFailure("lpl")
        best = None
        for d in (dp.d1, dp.d2):
            c = float(d @ ref)
            if best is None or abs(c) > abs(best[0]):
                best = (c, d)
        c, d = best
        if abs(c) < 0.5:
            raise _StageFailure("turn")
        return d if c > 0 else -d, pc[4]

    def _near_umbilic(self, p0, p1, travelled):
        """The umbilic (as a chart point) that the step p0 -> p1 passes, if any."""
        for k, z in enumerate(self.umb):
            if self.grace is not None and k == self.grace[0] and travelled < self.grace[1]:
                continue
            for (a, b, _) in _images(self.dom, z[0], z[1]):
                if _segment_distance(p0, p1, np.array([a, b])) <= self.r_umb:
                    return np.array([a, b], dtype=float)
        return None

    def _closure(self, p0, p1, m0, m1, targets):
        """Closest approach of the step to a closure target, if close enough."""
        r = self.opts.closure_r
        h = float(np.linalg.norm(p1 - p0))
        for tgt in targets:
            for (a, b, flip) in _images(self.dom, tgt.uv[0], tgt.uv[1]):
                z = np.array([a, b])
                if _segment_distance(p0, p1, z) > r + 0.05 * h + 1e-12:
                    continue
                res = minimize_scalar(lambda t: float(np.sum((_hermite(p0, p1, m0, m1, t) - z) ** 2)),
                                      bounds=(0.0, 1.0), method="bounded",
                                      options={"xatol": 1e-12})
                t = float(res.x)
                dist = math.sqrt(max(res.fun, 0.0))
                if dist > r:
                    continue
                tang = _hermite_d(p0, p1, m0, m1, t)
                nt = float(np.linalg.norm(tang))
                dz = -tgt.d if flip else tgt.d
                if nt > 0 and float(tang @ dz) / nt >= self.opts.closure_cos:
                    return t
        return None

    def run(self, seed, d0, foliation, targets=(), budget_steps=None, budget_length=None,
            start_travelled=0.0, exit_on_domain=True, start_steps=0):
        """Integrate from ``seed`` along ``d0``; returns a dict with the raw trace."""
        opts = self.opts
        y = np.array(seed, dtype=float)
        r = np.array(d0, dtype=float) / np.linalg.norm(d0)
        pts_uv = [y.copy()]
        pc = point_coefficients(self.chart, y[0], y[1])
        pts_xyz = [pc[4] if pc is not None else self.chart.point(y[0], y[1])]
        h = min(self.h_max, 0.1 * self.h_max) if opts.atol > 0 else self.h_max
        steps = 0
        travelled = 0.0
        max_steps = budget_steps if budget_steps is not None else opts.max_steps
        max_len = budget_length if budget_length is not None else opts.max_length
        termination = None
        reason = None
        while termination is None:
            if steps >= max_steps:
                termination = Termination.STEP_LIMIT
                break
            if max_len is not None and travelled >= max_len - 1e-15:
                termination = Termination.STEP_LIMIT
                break
            hh = h if max_len is None else min(h, max_len - travelled)
            try:
                K = []
                for s in range(7):
                    if s == 0:
                        ys = y
                        ref = r
                    else:
                        ys = y + hh * sum(a * k for a, k in zip(_A[s], K))
                        ref = K[-1]
                    k, X = self.field(ys[0], ys[1], ref)
                    K.append(k)
                y5 = y + hh * sum(b * k for b, k in zip(_B5, K))
                y4 = y + hh * sum(b * k for b, k in zip(_B4, K))
                err = float(np.linalg.norm(y5 - y4))
            except _StageFailure as exc:
                reason = exc.reason
                if hh <= self.h_min:
                    termination = {"umbilic": Termination.UMBILIC_HIT,
                                   "lpl": Termination.LPL_HIT}.get(reason, Termination.DOMAIN_EXIT)
                    break
                h = hh * 0.25
                continue
            if err > opts.atol and hh > self.h_min:
                h = hh * max(0.2, 0.9 * (opts.atol / err) ** 0.2)
                continue
            # open-boundary check on the accepted point
            u1, v1, flip = self.dom.normalize(y5[0], y5[1])
            if not self.dom.contains(u1, v1):
                if hh <= self.h_min:
                    termination = Termination.DOMAIN_EXIT
                    break
                h = hh * 0.5
                continue
            p0, p1 = y, y5
            m0, m1 = hh * r, hh * K[6]
            steps += 1
            seg_len = hh
            closed_at = None
            if (opts.detect_closure and targets and start_steps + steps >= opts.closure_min_steps
                    and start_travelled + travelled + seg_len > 4 * opts.closure_r):
                closed_at = self._closure(p0, p1, m0, m1, targets)
            if closed_at is not None:
                travelled += closed_at * seg_len
                termination = Termination.CLOSED
                y = None
                break
            hit = self._near_umbilic(p0, p1, start_travelled + travelled + seg_len) if self.umb else None
            if hit is not None:
                # end the leaf on the umbilic itself rather than past it
                travelled += float(np.linalg.norm(hit - p0))
                pts_uv.append(hit)
                pts_xyz.append(self.chart.point(hit[0], hit[1]))
                termination = Termination.UMBILIC_HIT
                break
            travelled += seg_len
            y = np.array([u1, v1])
            r = -K[6] if flip else K[6]
            pts_uv.append(y.copy())
            pts_xyz.append(X)
            if err > 0:
                h = min(self.h_max, hh * min(5.0, 0.9 * (opts.atol / err) ** 0.2))
            else:
                h = min(self.h_max, hh * 5.0)
        return {"uv": pts_uv, "xyz": pts_xyz, "termination": termination, "steps": steps,
                "length": travelled, "direction": r, "last": pts_uv[-1]}


def _chart_umbilics(chart: ChartSpec, umbilics) -> list:
    """Umbilic locations in the parameters of ``chart``.

    Entries may be (u, v) pairs already in chart parameters or xyz triples,
    which are mapped with the chart inverse when they fall inside the chart.
    """
    out = []
    for p in umbilics:
        p = np.asarray(p, dtype=float)
        if p.shape == (2,):
            out.append(p)
        elif chart.inverse is not None:
            uv = chart.inverse(p)
            if uv is not None and chart.domain.contains(*uv):
                out.append(np.array(uv, dtype=float))
    return out


def _pick_direction(chart, uv, foliation, orientation, initial_direction, tol):
    from .jets import eval_jet
    from .surface import fundamental_data

    fd = fundamental_data(eval_jet(chart, *uv))
    dp = principal_directions(fd, tol)
    if dp.multiplicity is Multiplicity.UMBILIC_LIKE:
        raise SeedAtUmbilicError(f"seed {tuple(uv)} is umbilic-like")
    if dp.multiplicity is Multiplicity.NONE:
        raise SeedOutsideDomainError(f"no real principal direction at {tuple(uv)}")
    if initial_direction is not None:
        t = np.asarray(initial_direction, dtype=float)
        t = t / np.linalg.norm(t)
        c1, c2 = float(dp.d1 @ t), float(dp.d2 @ t)
        if abs(c1) >= abs(c2):
            return ("F1", dp.d1 if c1 >= 0 else -dp.d1)
        return ("F2", dp.d2 if c2 >= 0 else -dp.d2)
    d = dp.d1 if foliation == "F1" else dp.d2
    return foliation, orientation * d


def integrate_principal_line(chart: ChartSpec, seed, foliation: str = "F1",
                             opts: Optional[IntegrationOptions] = None, umbilics=(),
                             orientation: int = 1, initial_direction=None) -> PrincipalCurve:
    """Integrate one principal line of ``chart`` through ``seed`` = (u, v).

    ``foliation`` selects the root associated with k1 ("F1") or k2 ("F2") at
    the seed; ``initial_direction`` (a parameter-space vector) overrides it by
    picking the closest root. ``umbilics`` lists known umbilics (parameter
    pairs or xyz points) around which integration stops.
    """
    opts = opts or IntegrationOptions()
    if foliation not in ("F1", "F2"):
        raise ValueError("foliation must be 'F1' or 'F2'")
    dom = chart.domain
    u, v, _ = dom.normalize(float(seed[0]), float(seed[1]))
    if not dom.contains(u, v):
        raise SeedOutsideDomainError(f"seed {tuple(seed)} outside the domain of {chart.name}")
    uv = np.array([u, v])
    umb = _chart_umbilics(chart, umbilics)
    r_umb = opts.umbilic_radius_frac * dom.diameter
    for z in umb:
        if any(math.hypot(a - u, b - v) <= r_umb for (a, b, _) in _images(dom, z[0], z[1])):
            raise SeedAtUmbilicError("seed lies inside the umbilic exclusion radius")
    fol, d0 = _pick_direction(chart, uv, foliation, orientation, initial_direction, opts.coef_tol)
    tracer = _Tracer(chart, opts, umb)
    targets = [_Target(uv, d0)] if opts.detect_closure else []
    res = tracer.run(uv, d0, fol, targets)
    return _finish(res, fol, chart, uv)


def _finish(res, fol, chart, seed_uv, chart_index=None):
    term = res["termination"]
    uv = list(res["uv"])
    xyz = list(res["xyz"])
    if term is Termination.CLOSED:
        uv.append(np.array(seed_uv, dtype=float))
        xyz.append(xyz[0].copy())
    return PrincipalCurve(fol, np.array(uv), np.array(xyz), term is Termination.CLOSED, term,
                          res["steps"], res["length"], chart_index, chart.name)


def _to_chart_direction(jet_xu, jet_xv, t3):
    A = np.stack([jet_xu, jet_xv], axis=1)
    d, *_ = np.linalg.lstsq(A, t3, rcond=None)
    return d / np.linalg.norm(d)


def integrate_on_atlas(atlas: Atlas, seed_xyz, foliation: str = "F1",
                       opts: Optional[IntegrationOptions] = None, umbilics=(),
                       orientation: int = 1, initial_tangent=None, grace_umbilic=None,
                       grace_length: float = 0.0) -> PrincipalCurve:
    """Integrate a principal line across the charts of an atlas.

    The leaf is continued in the chart where the current point lies deepest
    whenever it leaves a chart. Closure is tested against the seed mapped into
    the current chart. ``umbilics`` are xyz points. ``grace_umbilic`` (an index
    into ``umbilics``) is ignored until the leaf has travelled ``grace_length``
    in parameter units, which lets separatrices leave their umbilic.
    """
    opts = opts or IntegrationOptions()
    seed_xyz = np.asarray(seed_xyz, dtype=float)
    ci, uv = atlas.locate(seed_xyz)
    chart = atlas.charts[ci]
    t3 = None
    if initial_tangent is not None:
        pc = point_coefficients(chart, *uv)
        t3 = np.asarray(initial_tangent, dtype=float)
        d_init = _to_chart_direction(pc[5], pc[6], t3)
    else:
        d_init = None
    fol, d0 = _pick_direction(chart, np.array(uv), foliation, orientation, d_init, opts.coef_tol)
    pc = point_coefficients(chart, *uv)
    seed_t3 = d0[0] * pc[5] + d0[1] * pc[6]
    umb_xyz = [np.asarray(p, dtype=float) for p in umbilics]

    all_uv, all_xyz, all_ci = [], [], []
    steps = 0
    length = 0.0
    termination = None
    cur_uv, cur_d = np.array(uv), d0
    exclude_prev = ()
    for _ in range(1000):
        chart = atlas.charts[ci]
        umb_uv = []
        grace = None
        for k, z in enumerate(umb_xyz):
            zz = chart.inverse(z)
            if zz is not None and chart.domain.contains(*zz):
                if grace_umbilic is not None and k == grace_umbilic:
                    grace = (len(umb_uv), grace_length)
                umb_uv.append(np.array(zz, dtype=float))
        tracer = _Tracer(chart, opts, umb_uv, grace)
        targets = []
        if opts.detect_closure:
            sz = chart.inverse(seed_xyz)
            if sz is not None and chart.domain.contains(*sz):
                pcs = point_coefficients(chart, *sz)
                targets = [_Target(np.array(sz, dtype=float),
                                   _to_chart_direction(pcs[5], pcs[6], seed_t3))]
        res = tracer.run(cur_uv, cur_d, fol, targets,
                         budget_steps=opts.max_steps - steps,
                         budget_length=None if opts.max_length is None else opts.max_length - length,
                         start_travelled=length, start_steps=steps)
        pts_uv = res["uv"] if not all_uv else res["uv"][1:]
        pts_xyz = res["xyz"] if not all_xyz else res["xyz"][1:]
        all_uv += pts_uv
        all_xyz += pts_xyz
        all_ci += [ci] * len(pts_uv)
        steps += res["steps"]
        length += res["length"]
        termination = res["termination"]
        if termination is not Termination.DOMAIN_EXIT:
            break
        # hand over to the deepest other chart
        last_uv = res["last"]
        pc = point_coefficients(chart, *last_uv)
        if pc is None:
            break
        t3 = res["direction"][0] * pc[5] + res["direction"][1] * pc[6]
        try:
            nci, nuv = atlas.locate(pc[4], exclude=(ci,))
        except Exception:
            break
        nchart = atlas.charts[nci]
        if nchart.depth(*nuv) <= 1e-6 * nchart.diameter:
            break
        npc = point_coefficients(nchart, *nuv)
        ci, cur_uv = nci, np.array(nuv)
        cur_d = _to_chart_direction(npc[5], npc[6], t3)
    if termination is Termination.CLOSED:
        all_uv.append(np.array(uv, dtype=float))
        all_xyz.append(np.array(all_xyz[0]))
        all_ci.append(all_ci[0])
    return PrincipalCurve(fol, np.array(all_uv), np.array(all_xyz),
                          termination is Termination.CLOSED, termination, steps, length,
                          np.array(all_ci), atlas.name)


# ---------------------------------------------------------------------------
# loci

@dataclass(frozen=True)
class GridSpec:
    nu: int = 200
    nv: int = 200
    u_range: Optional[tuple] = None
    v_range: Optional[tuple] = None

    def axes(self, chart: ChartSpec):
        d = chart.domain
        ur = self.u_range or d.u_range
        vr = self.v_range or d.v_range
        pu = d.u_mode == "periodic" and self.u_range is None
        pv = d.v_mode == "periodic" and self.v_range is None
        us = np.linspace(ur[0], ur[1], self.nu, endpoint=not pu)
        vs = np.linspace(vr[0], vr[1], self.nv, endpoint=not pv)
        return us, vs, (pu, pv)


@dataclass
class LocusCurve:
    kind: str
    polyline_uv: np.ndarray
    polyline_xyz: np.ndarray
    closed: bool


def _locus_function(chart, kind):
    def f(u, v):
        pc = point_coefficients(chart, u, v)
        if pc is None:
            return math.nan
        L, M, N, scale, X, xu, xv = pc
        if kind == "LD":
            E = xu[0] ** 2 + xu[1] ** 2 - xu[2] ** 2
            F = xu[0] * xv[0] + xu[1] * xv[1] - xu[2] * xv[2]
            G = xv[0] ** 2 + xv[1] ** 2 - xv[2] ** 2
            return E * G - F * F
        return M * M - 4 * L * N
    return f


def locus_values(chart: ChartSpec, kind: str, U, V):
    """detI (kind 'LD') or the discriminant M^2 - 4LN (kind 'LPL') on arrays."""
    jet = eval_jet_grid(chart, U, V)
    L, M, N, scale, detI = bde_coefficients(jet)
    if kind == "LD":
        return detI
    D = M * M - 4 * L * N
    # points where the equation degenerates entirely carry no sign information
    tiny = np.maximum(np.abs(L), np.maximum(np.abs(M), np.abs(N))) <= 1e-9 * scale
    return np.where(tiny, np.nan, D)


def trace_locus(chart: ChartSpec, kind: str, grid: Optional[GridSpec] = None,
                glue_tol: Optional[float] = None) -> list:
    """Zero contours of detI ('LD') or of the discriminant ('LPL').

    Crossings are polished on the grid edges. Pieces that meet through a fold
    or periodic edge are glued by their 3D endpoints.
    """
    if kind not in ("LD", "LPL"):
        raise ValueError("kind must be 'LD' or 'LPL'")
    grid = grid or GridSpec()
    us, vs, periodic = grid.axes(chart)
    U, V = np.meshgrid(us, vs, indexing="ij")
    vals = locus_values(chart, kind, U, V)
    if kind == "LPL":
        # a locus must separate regions where the discriminant changes sign
        finite = vals[np.isfinite(vals)]
        if finite.size == 0 or finite.min() >= 0 or finite.max() <= 0:
            return []
    func = _locus_function(chart, kind)
    raw = zero_contours(U, V, vals, func=func, periodic=periodic)
    if not raw:
        return []
    pieces = []
    for pts, closed in raw:
        xyz = chart.point(pts[:, 0], pts[:, 1])
        if closed:
            pts = np.vstack([pts, pts[:1]])
            xyz = np.vstack([xyz, xyz[:1]])
        pieces.append((xyz, [tuple(p) for p in pts], closed))
    scale = float(np.nanmax(np.abs(chart.point(U, V)))) if np.isfinite(chart.point(U, V)).any() else 1.0
    tol = glue_tol if glue_tol is not None else 1e-7 * max(scale, 1.0)
    closed_pieces = [(x, p, True) for x, p, c in pieces if c]
    open_pieces = [(x, p) for x, p, c in pieces if not c]
    glued = glue_polylines(open_pieces, tol) if open_pieces else []
    out = []
    for xyz, pl, closed in closed_pieces + glued:
        out.append(LocusCurve(kind, np.array(pl, dtype=float), np.asarray(xyz), bool(closed)))
    return out


def ld_residual(chart: ChartSpec, uv) -> float:
    """Normalised residual of the BDE along the LD curve through ``uv``.

    The curve tangent is orthogonal to grad(detI), evaluated by central
    differences of the exact detI.
    """
    f = _locus_function(chart, "LD")
    u, v = uv
    h = 1e-6 * max(1.0, abs(u), abs(v))
    gu = (f(u + h, v) - f(u - h, v)) / (2 * h)
    gv = (f(u, v + h) - f(u, v - h)) / (2 * h)
    pc = point_coefficients(chart, u, v)
    L, M, N = pc[:3]
    return direction_residual(L, M, N, (-gv, gu))


# ---------------------------------------------------------------------------
# Dupin-type verification for triple orthogonal systems

@dataclass
class DupinReport:
    max_residual: float
    curves: int
    passed: bool
    threshold: float
    per_curve: list = field(default_factory=list)


def verify_dupin(system, fixed_axis: str, sample: Optional[GridSpec] = None, *,
                 n_surfaces: int = 5, n_curves: int = 100, points_per_curve: int = 25,
                 threshold: float = 1e-8, rng_seed: int = 0) -> DupinReport:
    """Check that coordinate curves of a triple system solve the curvature-line BDE.

    ``system`` provides ``sample(rng, count)`` of admissible (u, v, w) triples
    and ``surface_chart(fixed, value)``. Coordinate surfaces with
    ``fixed_axis`` frozen are sampled; on each, coordinate curves of both
    families are tested with the normalised residual |coefficient| / scale
    (N for curves along the first parameter, L along the second).
    """
    rng = np.random.default_rng(rng_seed)
    names = "uvw"
    k = names.index(fixed_axis)
    free = [i for i in range(3) if i != k]
    base = system.sample(rng, n_curves)
    per = []
    worst = 0.0
    for idx in range(n_curves):
        t = base[idx]
        chart = system.surface_chart(fixed_axis, float(t[k]))
        along = idx % 2
        pts = system.sample(rng, 4 * points_per_curve)
        vals = []
        for p in pts:
            q = np.array(t, dtype=float)
            q[free[along]] = p[free[along]]
            if hasattr(system, "admissible") and not np.all(system.admissible(*q)):
                continue
            s, r = q[free[0]], q[free[1]]
            pc = point_coefficients(chart, s, r)
            if pc is None:
                continue
            L, M, N, scale = pc[:4]
            coef = N if along == 0 else L
            vals.append(abs(coef) / scale if scale > 0 else 0.0)
            if len(vals) >= points_per_curve:
                break
        cur = max(vals) if vals else math.nan
        per.append(cur)
        if vals:
            worst = max(worst, cur)
    passed = all(np.isfinite(per)) and worst <= threshold
    return DupinReport(worst, len(per), bool(passed), threshold, per)
