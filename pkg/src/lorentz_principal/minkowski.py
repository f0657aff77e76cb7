"""Linear algebra of Minkowski 3-space R^{2,1}.

The third coordinate is timelike. All functions accept array-likes whose
last axis has length 3, so they work on single vectors and on stacks.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

ETA = np.diag([1.0, 1.0, -1.0])
ETA.setflags(write=False)


def as_vec(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape[-1:] != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite vector component")
    return a


def minkowski_dot(u, v):
    """Lorentzian inner product x1*y1 + x2*y2 - x3*y3 (last axis)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def minkowski_norm(v):
    return np.sqrt(np.abs(minkowski_dot(v, v)))


def minkowski_cross(u, v) -> np.ndarray:
    """Lorentzian vector product, characterised by <u x v, w> = det(u, v, w)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = np.cross(u, v)
    c[..., 2] *= -1.0
    return c


class CausalCharacter(enum.Enum):
    SPACELIKE = "Spacelike"
    TIMELIKE = "Timelike"
    LIGHTLIKE = "Lightlike"


def classify_vector(v, tol: float = 1e-10) -> CausalCharacter:
    """Causal character of a single vector.

    A vector counts as lightlike when its Minkowski square is tiny relative to
    its Euclidean squared norm. The zero vector is spacelike by convention.
    """
    v = as_vec(v)
    e2 = float(v @ v)
    if e2 == 0.0:
        return CausalCharacter.SPACELIKE
    q = float(minkowski_dot(v, v))
    if abs(q) <= tol * e2:
        return CausalCharacter.LIGHTLIKE
    return CausalCharacter.SPACELIKE if q > 0 else CausalCharacter.TIMELIKE


def rotation_R(theta: float) -> np.ndarray:
    """Euclidean rotation of the spacelike (x, y) plane."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def boost_S(alpha: float) -> np.ndarray:
    """Hyperbolic rotation mixing x with the timelike axis."""
    ch, sh = np.cosh(alpha), np.sinh(alpha)
    return np.array([[ch, 0.0, sh], [0.0, 1.0, 0.0], [sh, 0.0, ch]])


def boost_T(beta: float) -> np.ndarray:
    """Hyperbolic rotation mixing y with the timelike axis."""
    ch, sh = np.cosh(beta), np.sinh(beta)
    return np.array([[1.0, 0.0, 0.0], [0.0, ch, sh], [0.0, sh, ch]])


def isometry_defect(L) -> float:
    """Sup-norm of L^T eta L - eta."""
    L = np.asarray(L, dtype=float)
    return float(np.max(np.abs(L.T @ ETA @ L - ETA)))


@dataclass(frozen=True)
class Isometry21:
    """Affine isometry p -> linear @ p + translation of R^{2,1}."""

    linear: np.ndarray
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        L = np.array(self.linear, dtype=float)
        t = np.array(self.translation, dtype=float)
        if L.shape != (3, 3) or t.shape != (3,):
            raise ValueError("Isometry21 needs a 3x3 linear part and a 3-vector")
        L.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Isometry21":
        return cls(np.eye(3))

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return p @ self.linear.T + self.translation

    def compose(self, other: "Isometry21") -> "Isometry21":
        """Return self after other."""
        return Isometry21(self.linear @ other.linear,
                          self.linear @ other.translation + self.translation)

    def __matmul__(self, other: "Isometry21") -> "Isometry21":
        return self.compose(other)

    def inverse(self) -> "Isometry21":
        # L^{-1} = eta L^T eta for a Lorentz transformation
        Li = ETA @ self.linear.T @ ETA
        return Isometry21(Li, -Li @ self.translation)

    def defect(self) -> float:
        return isometry_defect(self.linear)


def rotations(theta: float, alpha: float, beta: float) -> Isometry21:
    """Composite R(theta) S(alpha) T(beta) as a linear isometry."""
    return Isometry21(rotation_R(theta) @ boost_S(alpha) @ boost_T(beta))
