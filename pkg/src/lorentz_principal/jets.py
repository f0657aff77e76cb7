"""Second-order forward jets in two variables and chart evaluation.

A :class:`Jet` carries a value together with its first and second partial
derivatives with respect to the chart parameters (u, v). Arithmetic and the
elementary functions below propagate these derivatives with the chain rule,
so a chart written once as an ordinary formula yields its exact 2-jet.
Components may be floats or numpy arrays of a common shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import DomainError, SingularChartError

SQRT_CLAMP = 1e-14


class Jet:
    __slots__ = ("val", "du", "dv", "duu", "duv", "dvv")

    def __init__(self, val, du=0.0, dv=0.0, duu=0.0, duv=0.0, dvv=0.0):
        self.val = val
        self.du = du
        self.dv = dv
        self.duu = duu
        self.duv = duv
        self.dvv = dvv

    @classmethod
    def var_u(cls, u) -> "Jet":
        return cls(u, 1.0, 0.0)

    @classmethod
    def var_v(cls, v) -> "Jet":
        return cls(v, 0.0, 1.0)

    def parts(self):
        return (self.val, self.du, self.dv, self.duu, self.duv, self.dvv)

    def __repr__(self):
        return "Jet(" + ", ".join(f"{p!r}" for p in self.parts()) + ")"

    # -- arithmetic -----------------------------------------------------
    def __neg__(self):
        return Jet(-self.val, -self.du, -self.dv, -self.duu, -self.duv, -self.dvv)

    def __pos__(self):
        return self

    def __add__(self, o):
        if isinstance(o, Jet):
            return Jet(self.val + o.val, self.du + o.du, self.dv + o.dv,
                       self.duu + o.duu, self.duv + o.duv, self.dvv + o.dvv)
        return Jet(self.val + o, self.du, self.dv, self.duu, self.duv, self.dvv)

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, Jet):
            a, b = self, o
            return Jet(
                a.val * b.val,
                a.du * b.val + a.val * b.du,
                a.dv * b.val + a.val * b.dv,
                a.duu * b.val + 2.0 * a.du * b.du + a.val * b.duu,
                a.duv * b.val + a.du * b.dv + a.dv * b.du + a.val * b.duv,
                a.dvv * b.val + 2.0 * a.dv * b.dv + a.val * b.dvv,
            )
        return Jet(self.val * o, self.du * o, self.dv * o,
                   self.duu * o, self.duv * o, self.dvv * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Jet):
            return self * reciprocal(o)
        return self * (1.0 / o)

    def __rtruediv__(self, o):
        return reciprocal(self) * o

    def __pow__(self, n):
        if isinstance(n, Jet):
            return exp(n * log(self))
        if n == 2:
            return self * self
        x = self.val
        return _chain(self, x ** n, n * x ** (n - 1), n * (n - 1) * x ** (n - 2))


def _chain(a: Jet, f0, f1, f2) -> Jet:
    """Compose a scalar function with value f0, f' = f1, f'' = f2 at a.val."""
    return Jet(
        f0,
        f1 * a.du,
        f1 * a.dv,
        f1 * a.duu + f2 * a.du * a.du,
        f1 * a.duv + f2 * a.du * a.dv,
        f1 * a.dvv + f2 * a.dv * a.dv,
    )


def lift(x) -> Jet:
    return x if isinstance(x, Jet) else Jet(x)


def reciprocal(a: Jet) -> Jet:
    x = a.val
    with np.errstate(divide="ignore", invalid="ignore"):
        r = 1.0 / x
        return _chain(a, r, -r * r, 2.0 * r * r * r)


def sqrt(a) -> Jet:
    """Square root with the shared clamp band.

    Arguments in [-1e-14, 0) are treated as 0 (the derivatives are then
    infinite); arguments below -1e-14 give NaN, which scalar chart evaluation
    turns into :class:`SingularChartError`.
    """
    a = lift(a)
    x = np.asarray(a.val, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = np.where(x < -SQRT_CLAMP, np.nan, np.maximum(x, 0.0))
        s = np.sqrt(xc)
        f1 = 0.5 / s
        f2 = -0.25 / (s * xc)
        if xc.ndim == 0:
            s, f1, f2 = s[()], f1[()], f2[()]
        return _chain(a, s, f1, f2)


def sin(a) -> Jet:
    a = lift(a)
    s, c = np.sin(a.val), np.cos(a.val)
    return _chain(a, s, c, -s)


def cos(a) -> Jet:
    a = lift(a)
    s, c = np.sin(a.val), np.cos(a.val)
    return _chain(a, c, -s, -c)


def sinh(a) -> Jet:
    a = lift(a)
    s, c = np.sinh(a.val), np.cosh(a.val)
    return _chain(a, s, c, s)


def cosh(a) -> Jet:
    a = lift(a)
    s, c = np.sinh(a.val), np.cosh(a.val)
    return _chain(a, c, s, c)


def exp(a) -> Jet:
    a = lift(a)
    e = np.exp(a.val)
    return _chain(a, e, e, e)


def log(a) -> Jet:
    a = lift(a)
    x = a.val
    with np.errstate(divide="ignore", invalid="ignore"):
        return _chain(a, np.log(x), 1.0 / x, -1.0 / (x * x))


def arccos(a) -> Jet:
    a = lift(a)
    x = a.val
    with np.errstate(divide="ignore", invalid="ignore"):
        w = 1.0 - x * x
        r = 1.0 / np.sqrt(w)
        return _chain(a, np.arccos(x), -r, -x * r / w)


# ---------------------------------------------------------------------------
# chart domains

AXIS_MODES = ("open", "periodic", "fold")


@dataclass(frozen=True)
class Domain:
    """Parameter rectangle with a boundary behaviour per axis.

    ``periodic`` axes wrap. ``fold`` axes describe charts that are even under
    the reflection (u, v) -> (-u, -v) (or the analogous reflection about the
    far edge); crossing such an edge maps the point to its mirror image with
    the other coordinate negated and the direction of travel reversed.
    ``open`` axes end the chart. ``inside`` optionally restricts the
    rectangle further (for example to a disk).
    """

    u_range: tuple
    v_range: tuple
    u_mode: str = "open"
    v_mode: str = "open"
    inside: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        for m in (self.u_mode, self.v_mode):
            if m not in AXIS_MODES:
                raise ValueError(f"unknown axis mode {m!r}")
        if self.u_mode == "fold" and self.v_mode == "fold":
            raise ValueError("at most one fold axis is supported")

    @property
    def diameter(self) -> float:
        return math.hypot(self.u_range[1] - self.u_range[0], self.v_range[1] - self.v_range[0])

    @property
    def periods(self):
        return (self.u_range[1] - self.u_range[0] if self.u_mode == "periodic" else None,
                self.v_range[1] - self.v_range[0] if self.v_mode == "periodic" else None)

    def _wrap_axis(self, x, lo, hi):
        return lo + (x - lo) % (hi - lo)

    def normalize(self, u: float, v: float):
        """Map (u, v) to its representative inside the rectangle.

        Returns ``(u, v, flipped)``; ``flipped`` is True when an odd number of
        fold reflections was applied (tangent directions must be negated).
        Open axes are left untouched.
        """
        flipped = False
        for _ in range(8):
            changed = False
            if self.u_mode == "periodic":
                u = self._wrap_axis(u, *self.u_range)
            if self.v_mode == "periodic":
                v = self._wrap_axis(v, *self.v_range)
            if self.u_mode == "fold":
                lo, hi = self.u_range
                if u < lo or u > hi:
                    u = 2 * lo - u if u < lo else 2 * hi - u
                    v = self._reflect_other(v, self.v_range, self.v_mode)
                    flipped = not flipped
                    changed = True
            if self.v_mode == "fold":
                lo, hi = self.v_range
                if v < lo or v > hi:
                    v = 2 * lo - v if v < lo else 2 * hi - v
                    u = self._reflect_other(u, self.u_range, self.u_mode)
                    flipped = not flipped
                    changed = True
            if not changed:
                break
        return u, v, flipped

    @staticmethod
    def _reflect_other(x, rng, mode):
        # the reflection negates the companion coordinate about 0
        x = -x
        if mode == "periodic":
            lo, hi = rng
            x = lo + (x - lo) % (hi - lo)
        return x

    def contains(self, u: float, v: float, margin: float = 0.0) -> bool:
        ok = True
        if self.u_mode != "periodic":
            ok &= self.u_range[0] - margin <= u <= self.u_range[1] + margin
        if self.v_mode != "periodic":
            ok &= self.v_range[0] - margin <= v <= self.v_range[1] + margin
        if ok and self.inside is not None:
            ok = bool(self.inside(u, v))
        return bool(ok)

    def interior_margin(self, u: float, v: float) -> float:
        """Distance to the nearest open edge (inf when there is none)."""
        m = math.inf
        if self.u_mode == "open":
            m = min(m, u - self.u_range[0], self.u_range[1] - u)
        if self.v_mode == "open":
            m = min(m, v - self.v_range[0], self.v_range[1] - v)
        return m


@dataclass(frozen=True)
class ChartSpec:
    """An immutable chart X(u, v) into R^{2,1}.

    ``func`` maps two :class:`Jet` objects (or plain arrays) to three jets.
    ``inverse`` optionally maps a point of the image back to (u, v).
    ``closed_form_bde`` optionally returns closed-form (L, M, N) coefficients,
    proportional to the pipeline ones, for umbilic classification.
    """

    kind: str
    params: Mapping[str, float]
    domain: Domain
    func: Callable = field(repr=False, compare=False)
    inverse: Optional[Callable] = field(default=None, repr=False, compare=False)
    closed_form_bde: Optional[Callable] = field(default=None, repr=False, compare=False)
    name: str = ""
    margin: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    @property
    def diameter(self) -> float:
        return self.domain.diameter

    def point(self, u, v) -> np.ndarray:
        """Image point(s) without derivatives."""
        with np.errstate(all="ignore"):
            out = self.func(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        comps = [np.asarray(c.val if isinstance(c, Jet) else c, dtype=float) for c in out]
        return np.stack(np.broadcast_arrays(*comps), axis=-1)

    def depth(self, u: float, v: float) -> float:
        """How far inside the chart (u, v) lies; larger is safer."""
        if self.margin is not None:
            return float(self.margin(u, v))
        return self.domain.interior_margin(u, v)


@dataclass(frozen=True)
class SurfaceJet2:
    """Position and first/second partials of a chart at one or many points.

    Each vector field has shape ``S + (3,)`` where ``S`` is the sample shape.
    """

    X: np.ndarray
    Xu: np.ndarray
    Xv: np.ndarray
    Xuu: np.ndarray
    Xuv: np.ndarray
    Xvv: np.ndarray
    at: tuple

    @property
    def Xvu(self):
        return self.Xuv

    def components(self):
        return (self.X, self.Xu, self.Xv, self.Xuu, self.Xuv, self.Xvv)


def _assemble(jx: Jet, jy: Jet, jz: Jet, at) -> SurfaceJet2:
    parts = []
    for k in range(6):
        comps = np.broadcast_arrays(*(np.asarray(j.parts()[k], dtype=float) for j in (jx, jy, jz)))
        parts.append(np.stack(comps, axis=-1))
    shape = parts[0].shape
    parts = [np.broadcast_to(p, shape).copy() for p in parts]
    return SurfaceJet2(*parts, at=at)


def raw_jet(chart: ChartSpec, u, v) -> SurfaceJet2:
    """Evaluate the chart jet with no domain handling (NaN may appear)."""
    with np.errstate(all="ignore"):
        jx, jy, jz = (lift(c) for c in chart.func(Jet.var_u(u), Jet.var_v(v)))
    return _assemble(jx, jy, jz, (u, v))


def eval_jet(chart: ChartSpec, u: float, v: float) -> SurfaceJet2:
    """Exact 2-jet of ``chart`` at a single parameter point.

    Periodic parameters are wrapped first. Raises :class:`DomainError` outside
    the domain and :class:`SingularChartError` where the formula is not
    differentiable (a square root of a negative or vanishing argument).
    """
    u = float(u)
    v = float(v)
    d = chart.domain
    if d.u_mode == "periodic" or d.v_mode == "periodic":
        u, v, _ = Domain(d.u_range, d.v_range,
                         d.u_mode if d.u_mode == "periodic" else "open",
                         d.v_mode if d.v_mode == "periodic" else "open").normalize(u, v)
    if not d.contains(u, v, margin=1e-12 * max(1.0, d.diameter)):
        raise DomainError(f"({u}, {v}) lies outside the domain of chart {chart.name}")
    jet = raw_jet(chart, u, v)
    for comp in jet.components():
        if not np.all(np.isfinite(comp)):
            raise SingularChartError(f"chart {chart.name} is not smooth at ({u}, {v})")
    return jet


def eval_jet_grid(chart: ChartSpec, U, V) -> SurfaceJet2:
    """Vectorised jet on arrays of parameters; non-smooth points become NaN."""
    U, V = np.broadcast_arrays(np.asarray(U, dtype=float), np.asarray(V, dtype=float))
    return raw_jet(chart, U, V)


def finite_difference_jet(chart: ChartSpec, u: float, v: float, h: Optional[float] = None) -> SurfaceJet2:
    """Central-difference estimate of the chart 2-jet (test oracle).

    The default step balances truncation (h^2) against rounding (eps / h^2)
    for the second derivatives; first derivatives tolerate smaller steps.
    """
    if h is None:
        h = 1e-4 * max(1.0, abs(u), abs(v))
    d = chart.domain
    for val, rng, mode in ((u, d.u_range, d.u_mode), (v, d.v_range, d.v_mode)):
        if mode != "periodic" and not (rng[0] + 2 * h <= val <= rng[1] - 2 * h):
            raise DomainError("finite differences need a margin of 2h inside the domain")
    if d.inside is not None and not all(d.inside(u + a * h, v + b * h)
                                        for a in (-2, 2) for b in (-2, 2)):
        raise DomainError("finite differences need a margin of 2h inside the domain")

    def P(du, dv):
        return chart.point(u + du, v + dv)

    X = P(0, 0)
    Xu = (P(h, 0) - P(-h, 0)) / (2 * h)
    Xv = (P(0, h) - P(0, -h)) / (2 * h)
    Xuu = (P(h, 0) - 2 * X + P(-h, 0)) / h**2
    Xvv = (P(0, h) - 2 * X + P(0, -h)) / h**2
    Xuv = (P(h, h) - P(h, -h) - P(-h, h) + P(-h, -h)) / (4 * h * h)
    return SurfaceJet2(X, Xu, Xv, Xuu, Xuv, Xvv, at=(u, v))
