"""Closed-form quadric geometry in R^{2,1}.

Contents:

* ellipsoid charts: the global principal chart, graph caps and an atlas;
* the closed-form curvature-line equation on the upper/lower graph caps;
* the confocal triple system X(u, v, w) on the positive octant;
* the planar confocal conics and their solution families;
* the global triple orthogonal map Z(u, v, w) with its coordinate quadrics;
* reduction of an ellipsoid to diagonal form by an isometry of R^{2,1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jets as J
from .atlas import Atlas
from .errors import (DomainError, NoTimelikeEigenvectorError, NotPositiveDefiniteError,
                     ParamError)
from .jets import ChartSpec, Domain
from .minkowski import ETA, Isometry21, boost_S, boost_T, minkowski_dot, rotation_R

TWO_PI = 2.0 * math.pi


def _check_abc(a, b, c, strict=True):
    if not (a > 0 and b > 0 and c > 0):
        raise ParamError("ellipsoid semi-axes must be positive")
    if strict and not a > b:
        raise ParamError("this construction needs a > b > 0")


def ellipsoid_residual(a, b, c, xyz) -> np.ndarray:
    P = np.asarray(xyz, dtype=float)
    return P[..., 0] ** 2 / a**2 + P[..., 1] ** 2 / b**2 + P[..., 2] ** 2 / c**2 - 1.0


def ellipsoid_umbilics(a, b, c) -> np.ndarray:
    """The four umbilics of the triaxial ellipsoid (a > b), sorted by (x, z)."""
    _check_abc(a, b, c)
    x0 = a * math.sqrt((a * a - b * b) / (a * a + c * c))
    z0 = c * math.sqrt((b * b + c * c) / (a * a + c * c))
    return np.array([[sx * x0, 0.0, sz * z0] for sx in (-1, 1) for sz in (-1, 1)])


def lie_cartan_eigenvalue(a, b, c) -> float:
    """Positive eigenvalue 2*sqrt((a^2-b^2)/(a^2+c^2))*(a^2+c^2) at the umbilics."""
    return 2.0 * math.sqrt((a * a - b * b) / (a * a + c * c)) * (a * a + c * c)


# ---------------------------------------------------------------------------
# ellipsoid charts

def global_principal_chart(a: float, b: float, c: float, variant: str = "U1") -> ChartSpec:
    """Principal chart of the ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1.

    X(u, v) = (a cos u A(v), b sin u sin v, c B(u) cos v) with
    A = sqrt(A1 cos^2 v + sin^2 v), B = sqrt(B1 cos^2 u + sin^2 u).
    On ``U1`` = [0, pi] x [0, 2 pi] the v axis is periodic and the u edges are
    folds, since X(-u, v) = X(u, -v); ``U2`` swaps the roles.
    """
    _check_abc(a, b, c)
    A1 = (a * a - b * b) / (a * a + c * c)
    B1 = (b * b + c * c) / (a * a + c * c)

    def func(u, v):
        A = J.sqrt(A1 * J.cos(v) ** 2 + J.sin(v) ** 2)
        B = J.sqrt(B1 * J.cos(u) ** 2 + J.sin(u) ** 2)
        return a * J.cos(u) * A, b * J.sin(u) * J.sin(v), c * B * J.cos(v)

    if variant == "U1":
        dom = Domain((0.0, math.pi), (0.0, TWO_PI), "fold", "periodic")
    elif variant == "U2":
        dom = Domain((0.0, TWO_PI), (0.0, math.pi), "periodic", "fold")
    else:
        raise ValueError("variant must be 'U1' or 'U2'")
    return ChartSpec("ellipsoid", {"a": a, "b": b, "c": c}, dom, func,
                     name=f"ellipsoid-{variant}")


def principal_chart_seam(u, v, variant: str = "U1", tol: float = 1e-12):
    """True on the seam curves where the principal chart folds onto itself."""
    x = np.asarray(u if variant == "U1" else v, dtype=float)
    return (np.abs(np.sin(x)) <= tol)


def principal_chart_umbilic_params(variant: str = "U1"):
    """Parameter points of the principal chart that map to umbilics."""
    return [(0.0, 0.0), (0.0, math.pi), (math.pi, 0.0), (math.pi, math.pi)]


def tropic_parameter(a, b, c) -> float:
    """v1 = arccos(c / sqrt(b^2 + c^2)): the tropic is cos^2 v = cos^2 v1."""
    return math.acos(c / math.sqrt(b * b + c * c))


def graph_chart_equation(a: float, b: float, c: float):
    """Closed-form curvature-line coefficients on the cap (au, bv, +-c sqrt(1-u^2-v^2)).

    Returns a function of (u, v) giving (L, M, N), the coefficients of
    dv^2, du dv and du^2 respectively.
    """
    _check_abc(a, b, c)
    p, q = a * a + c * c, b * b + c * c

    def coeffs(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if np.any(u * u + v * v >= 1.0):
            raise DomainError("the graph chart needs u^2 + v^2 < 1")
        L = u * v * q
        M = u * u * p - v * v * q - a * a + b * b
        N = -u * v * p
        return L, M, N

    return coeffs


def _cap_closed_form(a, b, c):
    coeffs = graph_chart_equation(a, b, c)

    def jet_coeffs(u, v):
        p, q = a * a + c * c, b * b + c * c
        L = u * v * q
        M = u * u * p - v * v * q - (a * a - b * b)
        N = -(u * v * p)
        return L, M, N

    jet_coeffs.numeric = coeffs
    return jet_coeffs


def ellipsoid_cap_chart(a: float, b: float, c: float, axis: int = 2, sign: int = 1,
                        radius: float = 0.95) -> ChartSpec:
    """Graph chart of the ellipsoid over the coordinate plane orthogonal to ``axis``.

    Parameters are the two remaining normalised coordinates, restricted to the
    disk of the given radius. The z caps (axis 2) carry the closed-form
    curvature-line equation.
    """
    _check_abc(a, b, c, strict=False)
    if axis not in (0, 1, 2) or sign not in (1, -1):
        raise ValueError("axis must be 0, 1 or 2 and sign +-1")
    axes = (a, b, c)
    others = [k for k in range(3) if k != axis]
    r2max = radius * radius

    def func(u, v):
        h = J.sqrt(1.0 - u * u - v * v) if isinstance(u, J.Jet) else np.sqrt(1.0 - u * u - v * v)
        out = [None, None, None]
        out[others[0]] = axes[others[0]] * u
        out[others[1]] = axes[others[1]] * v
        out[axis] = sign * axes[axis] * h
        return tuple(out)

    def inverse(xyz):
        s = np.asarray(xyz, dtype=float) / np.array(axes)
        if sign * s[axis] <= 0:
            return None
        return (s[others[0]], s[others[1]])

    def margin(u, v):
        return radius - math.hypot(u, v)

    dom = Domain((-radius, radius), (-radius, radius),
                 inside=lambda u, v: u * u + v * v < r2max)
    name = "xyz"[axis] + ("+" if sign > 0 else "-") + "cap"
    cf = _cap_closed_form(a, b, c) if (axis == 2 and a > b) else None
    return ChartSpec("graph", {"a": a, "b": b, "c": c, "axis": axis, "sign": sign},
                     dom, func, inverse=inverse, closed_form_bde=cf, name=name, margin=margin)


def ellipsoid_atlas(a: float, b: float, c: float, radius: float = 0.95) -> Atlas:
    """Six graph caps covering the ellipsoid; z caps come first."""
    charts = [ellipsoid_cap_chart(a, b, c, axis, s, radius)
              for axis in (2, 0, 1) for s in (1, -1)]
    return Atlas(tuple(charts), name=f"ellipsoid({a},{b},{c})")


def polynomial_graph_chart(coeffs: dict, half_width: float = 1.0, name: str = "graph") -> ChartSpec:
    """Graph chart (u, v, h(u, v)) of a polynomial h = sum c_ij u^i v^j.

    ``coeffs`` maps (i, j) to c_ij.
    """
    items = [(int(i), int(j), float(cij)) for (i, j), cij in dict(coeffs).items()]

    def func(u, v):
        h = 0.0 * u
        for i, j, cij in items:
            term = cij
            for _ in range(i):
                term = term * u
            for _ in range(j):
                term = term * v
            h = h + term
        return u, v, h

    def inverse(xyz):
        return (float(xyz[0]), float(xyz[1]))

    dom = Domain((-half_width, half_width), (-half_width, half_width))
    params = {f"c{i}{j}": cij for i, j, cij in items}
    return ChartSpec("graph", params, dom, func, inverse=inverse, name=name)


def plane_chart(half_width: float = 1.0, height: float = 0.0) -> ChartSpec:
    def func(u, v):
        return u, v, 0.0 * u + height

    return ChartSpec("plane", {"height": height},
                     Domain((-half_width, half_width), (-half_width, half_width)),
                     func, inverse=lambda p: (float(p[0]), float(p[1])), name="plane")


# ---------------------------------------------------------------------------
# confocal triple system on the positive octant

@dataclass(frozen=True)
class ConfocalParams:
    a: float
    b: float
    c: float

    def __post_init__(self):
        _check_abc(self.a, self.b, self.c)

    @property
    def box(self):
        a2, b2, c2 = self.a**2, self.b**2, self.c**2
        return ((-c2, b2), (b2, a2), (-c2, b2))

    def admissible(self, u, v, w) -> np.ndarray:
        (u0, u1), (v0, v1), (w0, w1) = self.box
        u, v, w = (np.asarray(t, dtype=float) for t in (u, v, w))
        ok = (u0 < u) & (u < u1) & (v0 < v) & (v < v1) & (w0 < w) & (w < w1)
        return ok & (np.abs(u - w) > 1e-12 * (self.b**2 + self.c**2))

    def family_residual(self, t, xyz):
        """Residual of x^2/(a^2-t) + y^2/(b^2-t) + z^2/(c^2+t) = 1."""
        P = np.asarray(xyz, dtype=float)
        return (P[..., 0] ** 2 / (self.a**2 - t) + P[..., 1] ** 2 / (self.b**2 - t)
                + P[..., 2] ** 2 / (self.c**2 + t) - 1.0)

    def sample(self, rng, count, margin=1e-3):
        lo = np.array([r[0] for r in self.box])
        hi = np.array([r[1] for r in self.box])
        span = hi - lo
        out = []
        while len(out) < count:
            t = lo + span * (margin + (1 - 2 * margin) * rng.random(3))
            if self.admissible(*t) and abs(t[0] - t[2]) > margin * span[0]:
                out.append(t)
        return np.array(out)

    def surface_chart(self, fixed: str, value: float) -> ChartSpec:
        return octant_surface_chart(self, fixed, value)


def _octant_xyz(p: ConfocalParams, u, v, w, sqrt=np.sqrt):
    a2, b2, c2 = p.a**2, p.b**2, p.c**2
    x = sqrt((a2 - u) * (a2 - v) * (a2 - w) / ((a2 - b2) * (a2 + c2)))
    y = sqrt(-1.0 * ((b2 - u) * (b2 - v) * (b2 - w)) / ((a2 - b2) * (b2 + c2)))
    z = sqrt((c2 + u) * (c2 + v) * (c2 + w) / ((a2 + c2) * (b2 + c2)))
    return x, y, z


def octant_point(p: ConfocalParams, u, v, w) -> np.ndarray:
    if not np.all(p.admissible(u, v, w)):
        raise DomainError("(u, v, w) outside the admissible box")
    return np.stack(_octant_xyz(p, np.asarray(u, float), np.asarray(v, float),
                                np.asarray(w, float)), axis=-1)


def octant_frame(p: ConfocalParams, u, v, w):
    """X(u, v, w) and its Jacobian columns (X_u, X_v, X_w), vectorised.

    Uses d log x / du = -1/(2(a^2 - u)) and the analogous identities.
    Returns X with shape S+(3,) and D with shape S+(3, 3) where D[..., :, k]
    is the derivative along the k-th parameter.
    """
    X = octant_point(p, u, v, w)
    a2, b2, c2 = p.a**2, p.b**2, p.c**2
    cols = []
    for t in (np.asarray(u, float), np.asarray(v, float), np.asarray(w, float)):
        cols.append(np.stack([-X[..., 0] / (2 * (a2 - t)),
                              -X[..., 1] / (2 * (b2 - t)),
                              X[..., 2] / (2 * (c2 + t))], axis=-1))
    return X, np.stack(cols, axis=-1)


def octant_det_closed_form(p: ConfocalParams, u, v, w):
    X = octant_point(p, u, v, w)
    a2, b2, c2 = p.a**2, p.b**2, p.c**2
    return ((u - v) * (u - w) * (v - w)
            / (8 * X[..., 0] * X[..., 1] * X[..., 2] * (a2 - b2) * (a2 + c2) * (b2 + c2)))


def octant_chart(p: ConfocalParams):
    """Callable (u, v, w) -> (X, DX); see :func:`octant_frame`."""
    return lambda u, v, w: octant_frame(p, u, v, w)


def _fixed_order(fixed):
    if fixed not in ("u", "v", "w"):
        raise ValueError("fixed must be one of 'u', 'v', 'w'")
    return [n for n in "uvw" if n != fixed]


def octant_surface_chart(p: ConfocalParams, fixed: str, value: float) -> ChartSpec:
    """Coordinate surface of the octant system with one parameter frozen."""
    free = _fixed_order(fixed)
    box = dict(zip("uvw", p.box))
    if not box[fixed][0] < value < box[fixed][1]:
        raise DomainError(f"{fixed} = {value} outside its admissible interval")

    def func(s, t):
        args = {fixed: value, free[0]: s, free[1]: t}
        return _octant_xyz(p, args["u"], args["v"], args["w"],
                           sqrt=J.sqrt if isinstance(s, J.Jet) else np.sqrt)

    dom = Domain(box[free[0]], box[free[1]])
    return ChartSpec("confocal-octant", {"a": p.a, "b": p.b, "c": p.c, fixed: value},
                     dom, func, name=f"octant-{fixed}={value:g}")


# ---------------------------------------------------------------------------
# planar confocal conics

@dataclass(frozen=True)
class ConfocalConics:
    """The planar equation -xy dx^2 + (x^2 - y^2 - lam2) dx dy + xy dy^2 = 0."""

    lam2: float

    def __post_init__(self):
        if not self.lam2 > 0:
            raise ParamError("lambda^2 must be positive")

    @classmethod
    def from_ellipsoid(cls, a, b, c) -> "ConfocalConics":
        _check_abc(a, b, c)
        return cls((a * a - b * b) / (b * b + c * c))

    def coefficients(self, x, y):
        """(coefficient of dx^2, of dx dy, of dy^2)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return -x * y, x * x - y * y - self.lam2, x * y

    def residual(self, points, tangents):
        P = np.asarray(points, dtype=float)
        T = np.asarray(tangents, dtype=float)
        A, B, C = self.coefficients(P[..., 0], P[..., 1])
        dx, dy = T[..., 0], T[..., 1]
        scale = (np.abs(A) + np.abs(B) + np.abs(C)) * (dx * dx + dy * dy)
        return np.abs(A * dx * dx + B * dx * dy + C * dy * dy) / np.where(scale > 0, scale, 1.0)

    def ellipse(self, r, t):
        """Points and tangents of (R cos t, r sin t) with R^2 = r^2 + lam2."""
        t = np.asarray(t, dtype=float)
        R = math.sqrt(r * r + self.lam2)
        P = np.stack([R * np.cos(t), r * np.sin(t)], axis=-1)
        T = np.stack([-R * np.sin(t), r * np.cos(t)], axis=-1)
        return P, T

    def hyperbola(self, r, t, as_printed: bool = False):
        """Points and tangents of (R cosh t, r sinh t).

        The solution family needs R^2 + r^2 = lam2 (so 0 < r < lam). The
        relation R^2 - r^2 = lam2 is available through ``as_printed`` for
        comparison; it does not solve the equation.
        """
        t = np.asarray(t, dtype=float)
        R2 = self.lam2 + r * r if as_printed else self.lam2 - r * r
        if R2 <= 0:
            raise ParamError("hyperbola branch needs r^2 < lambda^2")
        R = math.sqrt(R2)
        P = np.stack([R * np.cosh(t), r * np.sinh(t)], axis=-1)
        T = np.stack([R * np.sinh(t), r * np.cosh(t)], axis=-1)
        return P, T

    def intersection(self, r_ellipse, r_hyperbola):
        """First-quadrant intersection point of an ellipse and a hyperbola."""
        Re = math.sqrt(r_ellipse**2 + self.lam2)
        Rh = math.sqrt(self.lam2 - r_hyperbola**2)
        # x^2/Re^2 + y^2/re^2 = 1 and x^2/Rh^2 - y^2/rh^2 = 1
        M = np.array([[1 / Re**2, 1 / r_ellipse**2], [1 / Rh**2, -1 / r_hyperbola**2]])
        x2, y2 = np.linalg.solve(M, [1.0, 1.0])
        return np.array([math.sqrt(x2), math.sqrt(y2)])


def conics_to_cap(a, b, c, xy):
    """Map planar conic coordinates to the cap parameters (u, v) = (sqrt(B1) x, y)."""
    B1 = (b * b + c * c) / (a * a + c * c)
    P = np.asarray(xy, dtype=float)
    return np.stack([math.sqrt(B1) * P[..., 0], P[..., 1]], axis=-1)


# ---------------------------------------------------------------------------
# global triple orthogonal map Z

@dataclass(frozen=True)
class StoParams:
    m: float
    n: float
    eps: int

    def __post_init__(self):
        if not (self.m > 0 and self.n > 0):
            raise ParamError("m and n must be positive")
        if self.eps not in (1, -1):
            raise ParamError("eps must be +1 or -1")
        if self.eps == -1 and not self.n < self.m:
            raise ParamError("eps = -1 needs n < m")

    @property
    def S(self) -> float:
        return self.m**2 + self.eps * self.n**2

    def admissible(self, u, v, w, margin: float = 0.0):
        """Both square-root arguments of Z positive (by at least ``margin``)."""
        u, v, w = (np.asarray(t, dtype=float) for t in (u, v, w))
        m2, n2, e = self.m**2, self.n**2, self.eps
        a1 = (e * n2 + m2) * np.cos(v) ** 2 + m2 * np.sin(v) ** 2
        a2 = ((e * n2 * np.cos(u) ** 2 - m2 * np.sin(u) ** 2)
              * (e * n2 * np.cosh(w) ** 2 + m2 * np.sinh(w) ** 2) / self.S)
        return (a1 > margin) & (a2 > margin)

    def w_limit(self) -> float:
        """Bound on |w| for eps = -1 (tanh^2 w < n^2/m^2), inf otherwise."""
        return math.atanh(self.n / self.m) if self.eps == -1 else math.inf

    def u_limit(self) -> float:
        """Bound on |u| near 0 for eps = +1 (tan^2 u < n^2/m^2), inf otherwise."""
        return math.atan(self.n / self.m) if self.eps == 1 else math.inf

    def sample(self, rng, count, margin=0.05):
        out = []
        wl = min(self.w_limit(), 2.0)
        ul = self.u_limit()
        while len(out) < count:
            if self.eps == 1:
                u = (rng.uniform(-1, 1) * (1 - margin) * ul) + rng.integers(0, 2) * math.pi
            else:
                u = rng.uniform(0, TWO_PI)
            v = rng.uniform(0, TWO_PI)
            w = rng.uniform(-1, 1) * (1 - margin) * wl
            if self.admissible(u, v, w, margin=1e-6):
                out.append((u, v, w))
        return np.array(out)

    def surface_chart(self, fixed: str, value: float) -> ChartSpec:
        return sto_surface_chart(self, fixed, value)


def _sto_xyz(p: StoParams, u, v, w):
    jet = any(isinstance(t, J.Jet) for t in (u, v, w))
    sqrt = J.sqrt if jet else np.sqrt
    cos = J.cos if jet else np.cos
    sin = J.sin if jet else np.sin
    cosh = J.cosh if jet else np.cosh
    sinh = J.sinh if jet else np.sinh
    m, n2, e = p.m, p.n**2, p.eps
    m2 = m * m
    A = cos(u) * cosh(w) * sqrt((e * n2 + m2) * cos(v) ** 2 + m2 * sin(v) ** 2)
    B = m * sin(u) * sin(v) * sinh(w)
    C = cos(v) * sqrt((e * n2 * cos(u) ** 2 - m2 * sin(u) ** 2)
                      * (e * n2 * cosh(w) ** 2 + m2 * sinh(w) ** 2) / (e * n2 + m2))
    return A, B, C


def sto_point(p: StoParams, u, v, w) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        x, y, z = _sto_xyz(p, np.asarray(u, float), np.asarray(v, float), np.asarray(w, float))
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def sto_frame(p: StoParams, u: float, v: float, w: float):
    """Z and its three partial derivatives at one admissible point."""
    from .errors import SingularChartError

    if not p.admissible(u, v, w):
        raise SingularChartError("square-root argument of Z is not positive here")
    ju, jv = J.Jet.var_u(float(u)), J.Jet.var_v(float(v))
    jw = J.Jet.var_v(float(w))
    A, B, C = _sto_xyz(p, ju, jv, float(w))
    Zu = np.array([A.du, B.du, C.du], dtype=float)
    Zv = np.array([A.dv, B.dv, C.dv], dtype=float)
    X = np.array([A.val, B.val, C.val], dtype=float)
    A2, B2, C2 = _sto_xyz(p, float(u), float(v), jw)
    Zw = np.array([J.lift(A2).dv, J.lift(B2).dv, J.lift(C2).dv], dtype=float)
    return X, np.stack([Zu, Zv, Zw], axis=-1)


def sto_surface_chart(p: StoParams, fixed: str, value: float, domain: Optional[Domain] = None) -> ChartSpec:
    """Coordinate surface of Z with one of u, v, w frozen."""
    free = _fixed_order(fixed)

    def func(s, t):
        args = {fixed: value, free[0]: s, free[1]: t}
        return _sto_xyz(p, args["u"], args["v"], args["w"])

    if domain is None:
        rng = {"u": (0.0, TWO_PI), "v": (0.0, TWO_PI),
               "w": (-min(p.w_limit(), 3.0), min(p.w_limit(), 3.0))}
        if p.eps == 1:
            rng["u"] = (-p.u_limit(), p.u_limit())
        domain = Domain(rng[free[0]], rng[free[1]],
                        "periodic" if free[0] in "uv" and p.eps == -1 else "open",
                        "periodic" if free[1] == "v" else "open")
    return ChartSpec("sto-z", {"m": p.m, "n": p.n, "eps": p.eps, fixed: value},
                     domain, func, name=f"sto-{fixed}={value:g}")


def sto_quadric(p: StoParams, fixed: str, value: float, as_printed: bool = False) -> np.ndarray:
    """Coefficients (cx, cy, cz) with cx x^2 + cy y^2 + cz z^2 = 1 for a coordinate surface.

    ``fixed='w'`` gives the ellipsoid-type surface, ``'v'`` the second
    ellipsoid-type family and ``'u'`` the hyperboloid-type family. The
    default coefficients are obtained by eliminating the free parameters from
    Z; ``as_printed=True`` returns an alternative sign pattern kept for
    comparison (it does not vanish on the surfaces).
    """
    m2, n2, e, S = p.m**2, p.n**2, p.eps, p.S
    if fixed == "w":
        ch2, sh2 = math.cosh(value) ** 2, math.sinh(value) ** 2
        cz = (S / ((e * n2 * ch2 - m2 * sh2) * m2) if as_printed
              else -S / (m2 * (e * n2 * ch2 + m2 * sh2)))
        return np.array([1 / (m2 * ch2), 1 / (m2 * sh2), cz])
    if fixed == "v":
        c2, s2 = math.cos(value) ** 2, math.sin(value) ** 2
        sgn = 1.0 if as_printed else -1.0
        return np.array([S / (m2 * (m2 + e * n2 * c2)),
                         sgn * S / (e * m2 * n2 * s2),
                         sgn * S / (e * m2 * n2 * c2)])
    if fixed == "u":
        c2, s2 = math.cos(value) ** 2, math.sin(value) ** 2
        cz = (S / (m2 * (m2 * s2 + e * n2 * c2)) if as_printed
              else S / (m2 * (m2 * s2 - e * n2 * c2)))
        return np.array([1 / (m2 * c2), -1 / (m2 * s2), cz])
    raise ValueError("fixed must be one of 'u', 'v', 'w'")


def quadric_residual(coeffs, xyz) -> np.ndarray:
    P = np.asarray(xyz, dtype=float)
    return P[..., 0] ** 2 * coeffs[0] + P[..., 1] ** 2 * coeffs[1] + P[..., 2] ** 2 * coeffs[2] - 1.0


def quadric_surface_type(coeffs) -> str:
    """Name of the central quadric with the given diagonal coefficients."""
    pos = int(sum(1 for c in coeffs if c > 0))
    return {3: "ellipsoid", 2: "hyperboloid of one sheet",
            1: "hyperboloid of two sheets", 0: "empty"}[pos]


def sto_params_for_ellipsoid(a: float, b: float, c: float):
    """Parameters (StoParams, w) for which Z(., ., w) covers the ellipsoid."""
    _check_abc(a, b, c)
    m = math.sqrt(a * a - b * b)
    n = math.sqrt((b * b + c * c) * (a * a - b * b)) / math.sqrt(a * a + c * c)
    return StoParams(m, n, -1), math.acosh(a / m)


# ---------------------------------------------------------------------------
# canonical form of an ellipsoid under isometries of R^{2,1}

@dataclass(frozen=True)
class GeneralQuadric:
    """E = a x^2 + b y^2 + c z^2 + 2d xy + 2e xz + 2f yz + g x + h y + k z + l."""

    a: float
    b: float
    c: float
    d: float = 0.0
    e: float = 0.0
    f: float = 0.0
    g: float = 0.0
    h: float = 0.0
    k: float = 0.0
    l: float = -1.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.d, self.e], [self.d, self.b, self.f], [self.e, self.f, self.c]])

    @property
    def linear(self) -> np.ndarray:
        return np.array([self.g, self.h, self.k])

    @classmethod
    def from_parts(cls, A, bvec=(0.0, 0.0, 0.0), l=-1.0) -> "GeneralQuadric":
        A = np.asarray(A, dtype=float)
        A = 0.5 * (A + A.T)
        return cls(A[0, 0], A[1, 1], A[2, 2], A[0, 1], A[0, 2], A[1, 2], *map(float, bvec), float(l))

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.einsum("...i,ij,...j->...", p, self.matrix, p) + p @ self.linear + self.l

    def leading_minors(self):
        A = self.matrix
        return (A[0, 0], A[0, 0] * A[1, 1] - A[0, 1] ** 2, float(np.linalg.det(A)))

    def is_positive_definite(self) -> bool:
        return all(m > 0 for m in self.leading_minors())

    def transformed(self, iso: Isometry21) -> "GeneralQuadric":
        """The quadric p -> E(iso(p))."""
        L, t = iso.linear, iso.translation
        A = self.matrix
        return GeneralQuadric.from_parts(L.T @ A @ L, 2 * L.T @ A @ t + L.T @ self.linear,
                                         float(t @ A @ t + self.linear @ t + self.l))


@dataclass(frozen=True)
class CanonicalForm:
    isometry: Isometry21
    lambdas: np.ndarray
    mu: np.ndarray
    kappa: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def diagonal_value(self, p) -> np.ndarray:
        """sum lambda_i p_i^2."""
        p = np.asarray(p, dtype=float)
        return (p * p) @ self.lambdas


def _cubic_real_roots(c2, c1, c0):
    """Real roots of x^3 + c2 x^2 + c1 x + c0 assuming all three are real."""
    shift = -c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    scale = max(abs(c2), abs(c1) ** 0.5, abs(c0) ** (1 / 3), 1e-300)
    if p >= -1e-14 * scale * scale:
        roots = np.array([shift, shift, shift]) + np.cbrt(-q)
    else:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = np.array([r * math.cos(phi - 2 * math.pi * k / 3) for k in range(3)]) + shift
    for i, x in enumerate(roots):
        fx = ((x + c2) * x + c1) * x + c0
        dfx = (3 * x + 2 * c2) * x + c1
        if dfx != 0:
            roots[i] = x - fx / dfx
    return np.sort(roots)


def _null_vector(B):
    rows = [B[0], B[1], B[2]]
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        v = np.cross(rows[i], rows[j])
        nv = np.linalg.norm(v)
        if best is None or nv > best[0]:
            best = (nv, v)
    return best


def _eta_normalize(v):
    q = minkowski_dot(v, v)
    return v / math.sqrt(abs(q)), q


def canonicalize(q: GeneralQuadric, tol: float = 1e-10) -> CanonicalForm:
    """Diagonal form of an ellipsoid under an isometry h of R^{2,1}.

    The pencil det(A - x eta) = 0 is solved as a cubic. A boost S(alpha) T(beta)
    takes (0, 0, -1) to the timelike eigenvector, a rotation R(theta)
    diagonalises the remaining spacelike block, and a translation removes the
    linear terms. With kappa = E(center) < 0 the result satisfies
    E(h(p)) = -kappa * (sum lambda_i p_i^2 - 1).
    """
    if not q.is_positive_definite():
        raise NotPositiveDefiniteError("quadratic part is not positive definite")
    A = q.matrix
    nA = ETA @ A
    tr = float(np.trace(nA))
    c2m = (nA[0, 0] * nA[1, 1] - nA[0, 1] * nA[1, 0] + nA[0, 0] * nA[2, 2]
           - nA[0, 2] * nA[2, 0] + nA[1, 1] * nA[2, 2] - nA[1, 2] * nA[2, 1])
    det = float(np.linalg.det(nA))
    roots = _cubic_real_roots(-tr, c2m, -det)
    neg = [x for x in roots if x < 0]
    if len(neg) != 1:
        raise NoTimelikeEigenvectorError("pencil does not have exactly one negative root")
    x3 = neg[0]
    Anorm = float(np.max(np.abs(A)))
    nv, e3 = _null_vector(A - x3 * ETA)
    if nv <= tol * Anorm * Anorm:
        raise NoTimelikeEigenvectorError("timelike eigenvector is not determined")
    e3, q3 = _eta_normalize(e3)
    if q3 >= 0:
        raise NoTimelikeEigenvectorError("eigenvector of the negative root is not timelike")
    if e3[2] > 0:
        e3 = -e3
    t = -e3
    sb = t[1]
    cb = math.sqrt(1.0 + sb * sb)
    alpha = math.asinh(t[0] / cb)
    beta = math.asinh(sb)
    h1 = boost_S(alpha) @ boost_T(beta)
    A1 = h1.T @ A @ h1
    num, den = 2 * A1[0, 1], A1[0, 0] - A1[1, 1]
    if abs(num) <= 1e-15 * Anorm:
        theta = 0.0
    elif den == 0.0:
        theta = math.copysign(math.pi / 4, num)
    else:
        theta = 0.5 * math.atan(num / den)
    R = rotation_R(theta)
    A2 = R.T @ A1 @ R
    if abs(A2[0, 1]) > 1e-9 * Anorm:
        R = rotation_R(-theta)
        A2 = R.T @ A1 @ R
    L = h1 @ R
    tau = -0.5 * np.linalg.solve(A, q.linear)
    kappa = float(q.l + 0.5 * q.linear @ tau)
    if not kappa < 0:
        raise NotPositiveDefiniteError("the quadric has no real points (kappa >= 0)")
    mu = np.array([A2[0, 0], A2[1, 1], A2[2, 2]])
    iso = Isometry21(L, tau)
    evecs = L.copy()
    evals = np.array([mu[0], mu[1], -mu[2]])
    return CanonicalForm(iso, mu / (-kappa), mu, kappa, evals, evecs)
