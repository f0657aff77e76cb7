"""Fundamental forms, Gauss map sign, curvatures and curvature-line coefficients.

The curvature-line equation is written L1 dv^2 + M1 du dv + N1 du^2 = 0 with

    L1 = F g^ - G f^,   M1 = E g^ - G e^,   N1 = E f^ - F e^,

where e^ = <Xuu, n>, f^ = <Xuv, n>, g^ = <Xvv, n> use the unnormalised
normal n = Xu x Xv. These equal eps * W * (Fg - Gf) and so on, i.e. the
classical coefficients multiplied by a smooth nonvanishing factor away from
the tropic, while staying smooth (and evaluable) on the tropic itself.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DegenerateError
from .jets import SurfaceJet2
from .minkowski import minkowski_cross, minkowski_dot


class SurfaceClass(enum.Enum):
    RIEMANNIAN = "Riemannian"
    LORENTZIAN = "Lorentzian"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class ComplexPair:
    """Marker for a pair of complex conjugate principal curvatures H +- i*imag."""

    real: float
    imag: float


@dataclass(frozen=True)
class FundamentalData:
    E: float
    F: float
    G: float
    e_hat: float
    f_hat: float
    g_hat: float
    detI: float
    W: float
    L1: float
    M1: float
    N1: float
    scale: float
    n: np.ndarray
    degenerate: bool
    eps: Optional[int] = None
    e: Optional[float] = None
    f: Optional[float] = None
    g: Optional[float] = None
    H: Optional[float] = None
    K: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None
    complex_pair: bool = False

    @property
    def N(self) -> Optional[np.ndarray]:
        """Unit normal eps * n / W, or None on the tropic."""
        if self.degenerate:
            return None
        return self.eps * self.n / self.W

    @property
    def coefficients(self):
        return (self.L1, self.M1, self.N1)


def bde_coefficients(jet: SurfaceJet2):
    """Vectorised (L1, M1, N1, scale, detI) for a jet of any sample shape.

    ``scale`` bounds the size the coefficients could reach for the given
    derivative magnitudes, so ratios against it are dimensionless.
    """
    Xu, Xv = jet.Xu, jet.Xv
    n = minkowski_cross(Xu, Xv)
    E = minkowski_dot(Xu, Xu)
    F = minkowski_dot(Xu, Xv)
    G = minkowski_dot(Xv, Xv)
    eh = minkowski_dot(jet.Xuu, n)
    fh = minkowski_dot(jet.Xuv, n)
    gh = minkowski_dot(jet.Xvv, n)
    L = F * gh - G * fh
    M = E * gh - G * eh
    N = E * fh - F * eh
    nu = np.linalg.norm(Xu, axis=-1)
    nv = np.linalg.norm(Xv, axis=-1)
    s2 = (np.linalg.norm(jet.Xuu, axis=-1) + 2 * np.linalg.norm(jet.Xuv, axis=-1)
          + np.linalg.norm(jet.Xvv, axis=-1))
    scale = (nu * nu + nv * nv) * s2 * nu * nv
    return L, M, N, scale, E * G - F * F


def fundamental_data(jet: SurfaceJet2, tol: float = 1e-10) -> FundamentalData:
    """All first/second order invariants of a single-point jet.

    On the tropic (|detI| <= tol * (E^2 + 2F^2 + G^2)) the normalised second
    form and curvatures are left as None; L1, M1, N1 are always returned.
    """
    Xu = np.asarray(jet.Xu, dtype=float)
    Xv = np.asarray(jet.Xv, dtype=float)
    if Xu.shape != (3,):
        raise ValueError("fundamental_data works on a single-point jet")
    n = minkowski_cross(Xu, Xv)
    E = float(minkowski_dot(Xu, Xu))
    F = float(minkowski_dot(Xu, Xv))
    G = float(minkowski_dot(Xv, Xv))
    eh = float(minkowski_dot(jet.Xuu, n))
    fh = float(minkowski_dot(jet.Xuv, n))
    gh = float(minkowski_dot(jet.Xvv, n))
    detI = E * G - F * F
    L1, M1, N1, scale, _ = bde_coefficients(jet)
    W = math.sqrt(abs(detI))
    common = dict(E=E, F=F, G=G, e_hat=eh, f_hat=fh, g_hat=gh, detI=detI, W=W,
                  L1=float(L1), M1=float(M1), N1=float(N1), scale=float(scale), n=n)
    if abs(detI) <= tol * (E * E + 2 * F * F + G * G):
        return FundamentalData(degenerate=True, **common)
    # <n, n> = -detI; eps makes det(Xu, Xv, N) > 0
    eps = 1 if detI < 0 else -1
    e, f, g = eps * eh / W, eps * fh / W, eps * gh / W
    H = (E * g + G * e - 2 * F * f) / (2 * detI)
    K = (e * g - f * f) / detI
    disc = H * H - K
    cplx = False
    k1 = k2 = None
    if disc < -1e-12 * max(H * H, abs(K), 1e-300):
        cplx = True
    else:
        r = math.sqrt(max(disc, 0.0))
        k1, k2 = H + r, H - r
    return FundamentalData(degenerate=False, eps=eps, e=e, f=f, g=g, H=H, K=K,
                           k1=k1, k2=k2, complex_pair=cplx, **common)


def surface_class(fd: FundamentalData, tol: float = 1e-10) -> SurfaceClass:
    if abs(fd.detI) <= tol * (fd.E**2 + 2 * fd.F**2 + fd.G**2):
        return SurfaceClass.DEGENERATE
    return SurfaceClass.RIEMANNIAN if fd.detI > 0 else SurfaceClass.LORENTZIAN


def principal_curvatures(fd: FundamentalData) -> Union[tuple, ComplexPair]:
    """(k1, k2) with k1 >= k2, or a :class:`ComplexPair` when H^2 < K."""
    if fd.degenerate:
        raise DegenerateError("principal curvatures are unbounded on the tropic")
    if fd.complex_pair:
        return ComplexPair(fd.H, math.sqrt(fd.K - fd.H * fd.H))
    return (fd.k1, fd.k2)


def normal_curvature(fd: FundamentalData, d) -> float:
    """II(d) / I(d) for a parameter direction d = (du, dv)."""
    if fd.degenerate:
        raise DegenerateError("normal curvature is undefined on the tropic")
    du, dv = d
    I = fd.E * du * du + 2 * fd.F * du * dv + fd.G * dv * dv
    II = fd.e * du * du + 2 * fd.f * du * dv + fd.g * dv * dv
    return II / I
