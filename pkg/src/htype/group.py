"""The solvable extension S = NA and its Siegel-domain and ball models.

Points of S are triples (X, Z, a) with a > 0 and product

    (X, Z, a)(X', Z', a') = (X + a^(1/2) X', Z + a Z' + 1/2 a^(1/2) [X, X'], a a').

All coordinate maps have an array form (``*_coords``) acting on stacked
coordinates of shape (..., m + k + 1) laid out as (X, Z, last), used by the
geometry and radial modules for batched evaluation, and a point-object form
for the public API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import CliffordSpec, HTypeAlgebra, bracket, j_map

__all__ = [
    "Space",
    "GroupElement",
    "AlgebraElement",
    "SiegelPoint",
    "BallPoint",
    "DomainError",
    "ConvergenceError",
    "make_space",
    "identity",
    "lie_bracket_s",
    "multiply",
    "inverse",
    "haar_density",
    "left_translation_differential",
    "left_translation_jacobian",
    "numeric_left_translation_jacobian",
    "to_siegel",
    "from_siegel",
    "cayley",
    "cayley_inv",
    "cayley_jacobian",
    "group_to_ball",
    "ball_to_group",
]


class DomainError(ValueError):
    """Input outside the domain of a map."""


class ConvergenceError(ArithmeticError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Space:
    """S = NA built on an H-type algebra.

    ``gram`` is the Gram matrix of the inner product on s in the frame
    (v, z, T).  It is the identity for every space built by :func:`make_space`;
    other values exist only to produce non-harmonic control metrics.
    """

    algebra: HTypeAlgebra
    gram: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def m(self) -> int:
        return self.algebra.m

    @property
    def k(self) -> int:
        return self.algebra.k

    @property
    def dim(self) -> int:
        return self.m + self.k + 1

    @property
    def Q(self) -> Fraction:
        return Fraction(self.m, 2) + self.k

    @property
    def spec(self) -> CliffordSpec | None:
        return self.algebra.spec

    @property
    def gram_matrix(self) -> np.ndarray:
        return np.eye(self.dim) if self.gram is None else self.gram

    def split(self, coords):
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1] != self.dim:
            raise ValueError(f"expected trailing dimension {self.dim}, got {coords.shape}")
        m, k = self.m, self.k
        return coords[..., :m], coords[..., m : m + k], coords[..., m + k]

    def join(self, X, Z, last) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Z = np.asarray(Z, dtype=float)
        last = np.asarray(last, dtype=float)
        return np.concatenate([X, Z, last[..., None]], axis=-1)

    def __repr__(self):
        label = self.spec.label() if self.spec else f"k={self.k}"
        return f"Space({label}, m={self.m}, dim={self.dim})"


def make_space(k: int, mult=1) -> Space:
    return Space(HTypeAlgebra.from_spec(CliffordSpec(k, mult)))


def _arr(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


class _Point:
    """Shared plumbing for the (X, Z, scalar) point types."""

    _last = ""

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.X, self.Z, [getattr(self, self._last)]])

    @classmethod
    def from_coords(cls, space: Space, coords):
        X, Z, last = space.split(coords)
        return cls(X, Z, float(last))


@dataclass(frozen=True, eq=False)
class GroupElement(_Point):
    X: np.ndarray
    Z: np.ndarray
    a: float
    _last = "a"

    def __post_init__(self):
        object.__setattr__(self, "X", _arr(self.X))
        object.__setattr__(self, "Z", _arr(self.Z))
        if not self.a > 0:
            raise DomainError(f"a must be positive, got {self.a}")
        object.__setattr__(self, "a", float(self.a))


@dataclass(frozen=True, eq=False)
class AlgebraElement(_Point):
    X: np.ndarray
    Z: np.ndarray
    t: float
    _last = "t"

    def __post_init__(self):
        object.__setattr__(self, "X", _arr(self.X))
        object.__setattr__(self, "Z", _arr(self.Z))
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True, eq=False)
class SiegelPoint(_Point):
    X: np.ndarray
    Z: np.ndarray
    t: float
    _last = "t"

    def __post_init__(self):
        object.__setattr__(self, "X", _arr(self.X))
        object.__setattr__(self, "Z", _arr(self.Z))
        object.__setattr__(self, "t", float(self.t))
        if not self.t > 0.25 * float(self.X @ self.X):
            raise DomainError("Siegel point requires t > |X|^2 / 4")


@dataclass(frozen=True, eq=False)
class BallPoint(_Point):
    X: np.ndarray
    Z: np.ndarray
    t: float
    _last = "t"

    def __post_init__(self):
        object.__setattr__(self, "X", _arr(self.X))
        object.__setattr__(self, "Z", _arr(self.Z))
        object.__setattr__(self, "t", float(self.t))
        if not float(self.X @ self.X + self.Z @ self.Z) + self.t**2 < 1.0:
            raise DomainError("ball point must satisfy |X|^2 + |Z|^2 + t^2 < 1")

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.coords))


def identity(space: Space) -> GroupElement:
    return GroupElement(np.zeros(space.m), np.zeros(space.k), 1.0)


# --------------------------------------------------------------------------
# Lie algebra of S
# --------------------------------------------------------------------------


def lie_bracket_s(space: Space, u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
    """Bracket on s = v + z + RT with [T, X + Z] = X/2 + Z."""
    alg = space.algebra
    X = 0.5 * (u.t * v.X - v.t * u.X)
    Z = bracket(alg, u.X, v.X) + u.t * v.Z - v.t * u.Z
    return AlgebraElement(X, Z, 0.0)


# --------------------------------------------------------------------------
# group law
# --------------------------------------------------------------------------


def multiply_coords(space: Space, s, s2) -> np.ndarray:
    X, Z, a = space.split(s)
    X2, Z2, a2 = space.split(s2)
    ra = np.sqrt(a)[..., None]
    return space.join(
        X + ra * X2,
        Z + a[..., None] * Z2 + 0.5 * ra * bracket(space.algebra, X, X2),
        a * a2,
    )


def inverse_coords(space: Space, s) -> np.ndarray:
    X, Z, a = space.split(s)
    return space.join(-X / np.sqrt(a)[..., None], -Z / a[..., None], 1.0 / a)


def multiply(space: Space, s: GroupElement, s2: GroupElement) -> GroupElement:
    return GroupElement.from_coords(space, multiply_coords(space, s.coords, s2.coords))


def inverse(space: Space, s: GroupElement) -> GroupElement:
    return GroupElement.from_coords(space, inverse_coords(space, s.coords))


def haar_density(space: Space, s: GroupElement) -> float:
    """Density a^(-Q-1) of the left Haar measure in (X, Z, a) coordinates."""
    return float(s.a ** (-float(space.Q) - 1.0))


def left_translation_differential(space: Space, g) -> np.ndarray:
    """Differential of x -> g x in (X, Z, a) coordinates.

    It does not depend on the base point.  ``g`` may be a GroupElement or a
    stacked coordinate array; the result has shape (..., dim, dim).
    """
    coords = g.coords if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    Xg, _, ag = space.split(coords)
    m, k, n = space.m, space.k, space.dim
    out = np.zeros(coords.shape[:-1] + (n, n))
    ra = np.sqrt(ag)[..., None, None]
    eye_m = np.eye(m)
    out[..., :m, :m] = ra * eye_m
    out[..., m : m + k, m : m + k] = ag[..., None, None] * np.eye(k)
    # d/dX' of 1/2 a^(1/2) [Xg, X']: row i is 1/2 a^(1/2) (E_i Xg)^T
    EX = np.einsum("ipq,...q->...ip", space.algebra.E, Xg)
    out[..., m : m + k, :m] = 0.5 * ra * EX
    out[..., n - 1, n - 1] = ag
    return out


def left_translation_jacobian(space: Space, g: GroupElement, s: GroupElement | None = None) -> float:
    """det of the differential of x -> g x.

    The closed-form differential is constant in the base point, so ``s`` only
    matters for :func:`numeric_left_translation_jacobian`.
    """
    return float(np.linalg.det(left_translation_differential(space, g)))


def numeric_left_translation_jacobian(space: Space, g: GroupElement, s: GroupElement, rel_step: float = 1e-5) -> float:
    """Central-difference determinant of x -> g x at s, from the product formula."""
    base = s.coords
    h = rel_step * np.maximum(1.0, np.abs(base))
    eye = np.eye(space.dim) * h
    plus = multiply_coords(space, g.coords, base + eye)
    minus = multiply_coords(space, g.coords, base - eye)
    J = ((plus - minus) / (2.0 * h[:, None])).T
    return float(np.linalg.det(J))


# --------------------------------------------------------------------------
# Siegel domain
# --------------------------------------------------------------------------


def to_siegel_coords(space: Space, s) -> np.ndarray:
    X, Z, a = space.split(s)
    return space.join(X, Z, a + 0.25 * np.einsum("...i,...i", X, X))


def from_siegel_coords(space: Space, d) -> np.ndarray:
    X, Z, t = space.split(d)
    a = t - 0.25 * np.einsum("...i,...i", X, X)
    if np.any(a <= 0):
        raise DomainError("point on or outside the Siegel domain boundary")
    return space.join(X, Z, a)


def to_siegel(space: Space, s: GroupElement) -> SiegelPoint:
    return SiegelPoint.from_coords(space, to_siegel_coords(space, s.coords))


def from_siegel(space: Space, d: SiegelPoint) -> GroupElement:
    return GroupElement.from_coords(space, from_siegel_coords(space, d.coords))


# --------------------------------------------------------------------------
# Cayley transform B -> D
# --------------------------------------------------------------------------


def cayley_coords(space: Space, b) -> np.ndarray:
    X, Z, t = space.split(b)
    alg = space.algebra
    u = 1.0 - t
    zz = np.einsum("...i,...i", Z, Z)
    den = u**2 + zz
    XD = 2.0 * (u[..., None] * X + j_map(alg, Z, X)) / den[..., None]
    ZD = 2.0 * Z / den[..., None]
    tD = (1.0 - t**2 - zz) / den
    return space.join(XD, ZD, tD)


def cayley_inv_coords(space: Space, d) -> np.ndarray:
    """Closed-form inverse of the Cayley transform.

    The (Z, t) part of C is the Moebius map w = (1 + zeta)/(1 - zeta) with
    zeta = t + Z and w = t_D + Z_D; the X part is X_D = 2 (1 - t - J_Z)^(-1) X.
    """
    XD, ZD, tD = space.split(d)
    alg = space.algebra
    zz = np.einsum("...i,...i", ZD, ZD)
    den = (1.0 + tD) ** 2 + zz
    t = (tD**2 + zz - 1.0) / den
    Z = 2.0 * ZD / den[..., None]
    u = 1.0 - t
    X = 0.5 * (u[..., None] * XD - j_map(alg, Z, XD))
    return space.join(X, Z, t)


def _newton_cayley_inv(space: Space, d: np.ndarray, seed: np.ndarray, tol=1e-13, max_iter=100):
    """Damped Newton on the forward map, used when the closed form misbehaves."""
    x = seed.copy()
    res = cayley_coords(space, x) - d
    norm = np.linalg.norm(res)
    for _ in range(max_iter):
        if norm <= tol * (1.0 + np.linalg.norm(d)):
            return x
        step = np.linalg.solve(cayley_jacobian(space, x), res)
        lam = 1.0
        while lam > 1e-6:
            trial = x - lam * step
            if trial @ trial < 1.0:
                tres = cayley_coords(space, trial) - d
                if np.linalg.norm(tres) < norm:
                    x, res, norm = trial, tres, np.linalg.norm(tres)
                    break
            lam *= 0.5
        else:
            break
    raise ConvergenceError("inverse Cayley iteration did not converge", float(norm))


def cayley_inv_checked(space: Space, d, tol: float = 1e-10) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    b = cayley_inv_coords(space, d)
    err = np.abs(cayley_coords(space, b) - d).max(axis=-1)
    scale = 1.0 + np.abs(d).max(axis=-1)
    bad = np.atleast_1d(err > tol * scale)
    if not bad.any():
        return b
    flat_b = np.atleast_2d(b).copy()
    flat_d = np.atleast_2d(d)
    for i in np.flatnonzero(bad):
        seed = np.zeros(space.dim)
        tD = flat_d[i, -1]
        seed[-1] = (tD - 1.0) / (tD + 1.0)
        flat_b[i] = _newton_cayley_inv(space, flat_d[i], seed)
    return flat_b.reshape(b.shape)


def cayley(space: Space, b: BallPoint) -> SiegelPoint:
    return SiegelPoint.from_coords(space, cayley_coords(space, b.coords))


def cayley_inv(space: Space, d: SiegelPoint) -> BallPoint:
    return BallPoint.from_coords(space, cayley_inv_checked(space, d.coords))


def cayley_jacobian(space: Space, b) -> np.ndarray:
    """Analytic differential of the Cayley transform at ball coordinates b."""
    b = np.asarray(b, dtype=float)
    X, Z, t = space.split(b)
    E = space.algebra.E
    m, k, n = space.m, space.k, space.dim
    u = 1.0 - t
    zz = np.einsum("...i,...i", Z, Z)
    den = u**2 + zz
    num_t = 1.0 - t**2 - zz
    JZ = np.einsum("...i,ipq->...pq", Z, E)
    W = u[..., None] * X + np.einsum("...pq,...q->...p", JZ, X)  # (u + J_Z) X
    EX = np.einsum("ipq,...q->...pi", E, X)  # column i = E_i X

    out = np.zeros(b.shape[:-1] + (n, n))
    d1 = den[..., None, None]
    d2 = (den**2)[..., None, None]
    out[..., :m, :m] = 2.0 * (u[..., None, None] * np.eye(m) + JZ) / d1
    out[..., :m, m : m + k] = 2.0 * EX / d1 - 4.0 * W[..., :, None] * Z[..., None, :] / d2
    out[..., :m, n - 1] = -2.0 * X / den[..., None] + 4.0 * u[..., None] * W / (den**2)[..., None]
    out[..., m : m + k, m : m + k] = 2.0 * np.eye(k) / d1 - 4.0 * Z[..., :, None] * Z[..., None, :] / d2
    out[..., m : m + k, n - 1] = 4.0 * u[..., None] * Z / (den**2)[..., None]
    out[..., n - 1, m : m + k] = -2.0 * Z / den[..., None] - 2.0 * num_t[..., None] * Z / (den**2)[..., None]
    out[..., n - 1, n - 1] = -2.0 * t / den + 2.0 * u * num_t / den**2
    return out


# --------------------------------------------------------------------------
# composite charts
# --------------------------------------------------------------------------


def ball_to_group_coords(space: Space, b) -> np.ndarray:
    return from_siegel_coords(space, cayley_coords(space, b))


def group_to_ball_coords(space: Space, s) -> np.ndarray:
    return cayley_inv_checked(space, to_siegel_coords(space, s))


def ball_to_group_jacobian(space: Space, b) -> np.ndarray:
    """Differential of B -> S, (h^-1 o C), at ball coordinates b."""
    b = np.asarray(b, dtype=float)
    JC = cayley_jacobian(space, b)
    XD = cayley_coords(space, b)[..., : space.m]
    # a = t_D - |X_D|^2 / 4
    out = JC.copy()
    out[..., -1, :] = JC[..., -1, :] - 0.5 * np.einsum("...p,...pj->...j", XD, JC[..., : space.m, :])
    return out


def group_to_ball(space: Space, s: GroupElement) -> BallPoint:
    return BallPoint.from_coords(space, group_to_ball_coords(space, s.coords))


def ball_to_group(space: Space, b: BallPoint) -> GroupElement:
    return GroupElement.from_coords(space, ball_to_group_coords(space, b.coords))
