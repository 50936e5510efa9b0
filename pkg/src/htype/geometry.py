"""Left-invariant geometry of S: connection, curvature, and the ball chart.

Curvature quantities are computed on the Lie algebra frame (e_1..e_m, f_1..f_k,
T) where left-invariant fields have constant coefficients, so the Levi-Civita
connection, Riemann tensor and its covariant derivative are finite
contractions of the structure constants.  Chart quantities in the ball model
(metric, Christoffel symbols, geodesics) are evaluated pointwise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import j_map
from .group import (
    AlgebraElement,
    BallPoint,
    DomainError,
    Space,
    ball_to_group_coords,
    ball_to_group_jacobian,
    inverse_coords,
    left_translation_differential,
)

log = logging.getLogger(__name__)

__all__ = [
    "Frame",
    "CurvatureData",
    "ConditioningError",
    "frame",
    "koszul_connection",
    "riemann_tensor",
    "curvature",
    "nabla_R_norm",
    "symmetry_ratio",
    "is_symmetric",
    "sectional_curvature",
    "totally_geodesic_check",
    "metric_at_ball",
    "christoffel_at_ball",
    "geodesic_integrate",
    "geodesic_fan",
    "distance_from_origin",
]

SYMMETRIC_REL_TOL = 1e-8
NONSYMMETRIC_SEPARATION = 1e-3
MAX_BALL_RADIUS = 0.999


class ConditioningError(ArithmeticError):
    """Point too close to the ball boundary for a reliable chart evaluation."""


@dataclass(frozen=True, eq=False)
class Frame:
    """Structure constants: [e_i, e_j] = sum_l c[i, j, l] e_l."""

    c: np.ndarray
    gram: np.ndarray
    m: int
    k: int

    @property
    def n(self) -> int:
        return self.c.shape[0]


def frame(space: Space) -> Frame:
    return _frame(space.algebra, _gram_key(space))


def _gram_key(space: Space):
    return None if space.gram is None else tuple(map(float, np.ravel(space.gram)))


@lru_cache(maxsize=64)
def _frame(alg, gram_key) -> Frame:
    m, k = alg.m, alg.k
    n = m + k + 1
    c = np.zeros((n, n, n))
    # [e_a, e_b] = sum_i <E_i e_a, e_b> f_i
    c[:m, :m, m:m + k] = np.einsum("iba->abi", alg.E)
    T = n - 1
    for a in range(m):
        c[T, a, a] = 0.5
        c[a, T, a] = -0.5
    for i in range(m, m + k):
        c[T, i, i] = 1.0
        c[i, T, i] = -1.0
    gram = np.eye(n) if gram_key is None else np.array(gram_key).reshape(n, n)
    c.setflags(write=False)
    gram.setflags(write=False)
    return Frame(c=c, gram=gram, m=m, k=k)


def koszul_connection(space: Space) -> np.ndarray:
    """Gamma[i, j, l]: nabla_{e_i} e_j = sum_l Gamma[i, j, l] e_l.

    From 2<nabla_U V, W> = <[U,V],W> - <[V,W],U> + <[W,U],V> on the frame.
    """
    fr = frame(space)
    low = np.einsum("ijp,pl->ijl", fr.c, fr.gram)
    # low.transpose(2, 0, 1)[i, j, l] = low[j, l, i]; low.transpose(1, 2, 0)[i, j, l] = low[l, i, j]
    L = 0.5 * (low - low.transpose(2, 0, 1) + low.transpose(1, 2, 0))
    return np.einsum("ijp,pl->ijl", L, np.linalg.inv(fr.gram))


@dataclass(frozen=True, eq=False)
class CurvatureData:
    """Frame components of the connection, curvature and its derivative.

    ``R[i, j, p, l]`` is the e_p coefficient of R(e_i, e_j) e_l and
    ``DR[a, i, j, p, l]`` the e_p coefficient of (nabla_{e_a} R)(e_i, e_j) e_l.
    """

    gamma: np.ndarray
    R: np.ndarray
    DR: np.ndarray
    gram: np.ndarray

    @property
    def R_norm(self) -> float:
        return float(np.linalg.norm(self.R))

    @property
    def DR_norm(self) -> float:
        return float(np.linalg.norm(self.DR))

    @property
    def R_lower(self) -> np.ndarray:
        """R_{ijlp} = <R(e_i, e_j) e_l, e_p>."""
        return np.einsum("ijql,qp->ijlp", self.R, self.gram)

    def bianchi_residual(self) -> float:
        return float(np.abs(_cyclic(self.R)).max())

    def symmetry_residual(self) -> float:
        Rl = self.R_lower
        return float(max(
            np.abs(Rl + Rl.transpose(1, 0, 2, 3)).max(),
            np.abs(Rl + Rl.transpose(0, 1, 3, 2)).max(),
            np.abs(Rl - Rl.transpose(2, 3, 0, 1)).max(),
        ))


def _cyclic(R: np.ndarray) -> np.ndarray:
    # R(e_i,e_j)e_l + R(e_j,e_l)e_i + R(e_l,e_i)e_j, index order [i, j, l, p]
    Rijl = R.transpose(0, 1, 3, 2)
    return Rijl + Rijl.transpose(1, 2, 0, 3) + Rijl.transpose(2, 0, 1, 3)


def _operators(gamma: np.ndarray) -> np.ndarray:
    # A[i][p, j] = Gamma[i, j, p]: matrix of nabla_{e_i} on coefficient vectors
    return gamma.transpose(0, 2, 1)


def riemann_tensor(space: Space) -> CurvatureData:
    return curvature(space)


def curvature(space: Space) -> CurvatureData:
    """Curvature data of ``space``, cached per algebra and metric."""
    return _curvature(space.algebra, _gram_key(space))


@lru_cache(maxsize=32)
def _curvature(alg, gram_key) -> CurvatureData:
    space = Space(alg, None if gram_key is None else np.array(gram_key).reshape(alg.m + alg.k + 1, -1))
    fr = frame(space)
    gamma = koszul_connection(space)
    A = _operators(gamma)
    AA = np.einsum("ipq,jql->ijpl", A, A)
    R = AA - AA.transpose(1, 0, 2, 3) - np.einsum("ijq,qpl->ijpl", fr.c, A)
    DR = (
        np.einsum("apq,ijql->aijpl", A, R)
        - np.einsum("ijpq,aql->aijpl", R, A)
        - np.einsum("aiq,qjpl->aijpl", gamma, R)
        - np.einsum("ajq,iqpl->aijpl", gamma, R)
    )
    for arr in (gamma, R, DR):
        arr.setflags(write=False)
    return CurvatureData(gamma=gamma, R=R, DR=DR, gram=fr.gram)


def nabla_R_norm(space: Space) -> float:
    return curvature(space).DR_norm


def symmetry_ratio(space: Space) -> float:
    """||nabla R|| / ||R||."""
    cd = curvature(space)
    return cd.DR_norm / cd.R_norm


def is_symmetric(space: Space, rel_tol: float = SYMMETRIC_REL_TOL) -> bool:
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    ratio = symmetry_ratio(space)
    if rel_tol < ratio < NONSYMMETRIC_SEPARATION:
        log.warning(
            "%r: ||nabla R||/||R|| = %.3e lies between the symmetric and "
            "nonsymmetric thresholds", space, ratio,
        )
    return ratio <= rel_tol


def _as_frame_vector(space: Space, u) -> np.ndarray:
    if isinstance(u, AlgebraElement):
        return u.coords
    return np.asarray(u, dtype=float)


def sectional_curvature(space: Space, u, v) -> float:
    """<R(u,v)v, u> / (|u|^2 |v|^2 - <u,v>^2)."""
    cd = curvature(space)
    G = cd.gram
    u = _as_frame_vector(space, u)
    v = _as_frame_vector(space, v)
    area = (u @ G @ u) * (v @ G @ v) - (u @ G @ v) ** 2
    scale = (u @ G @ u) * (v @ G @ v)
    if area <= 1e-14 * scale or scale == 0:
        raise DomainError("sectional curvature needs linearly independent vectors")
    num = np.einsum("ijlp,i,j,l,p->", cd.R_lower, u, v, v, u)
    return float(num / area)


@dataclass(frozen=True)
class TotallyGeodesicReport:
    second_fundamental_form: float
    closure: float  # |component of [X0, J_Z0 X0] orthogonal to Z0|
    sectional: dict
    reference_sectional: dict
    nabla_R_restricted: float

    @property
    def sectional_deviation(self) -> float:
        return max(abs(self.sectional[key] - self.reference_sectional[key]) for key in self.sectional)

    def passed(self, tol: float = 1e-12, curvature_tol: float = 1e-10) -> bool:
        return (
            self.second_fundamental_form <= tol
            and self.closure <= tol
            and self.sectional_deviation <= curvature_tol
            and self.nabla_R_restricted <= curvature_tol
        )


_PLANE_NAMES = ("X0", "JX0", "Z0", "T")


def _plane_curvatures(space: Space, basis: np.ndarray) -> dict:
    out = {}
    for a in range(4):
        for b in range(a + 1, 4):
            out[f"{_PLANE_NAMES[a]},{_PLANE_NAMES[b]}"] = sectional_curvature(space, basis[a], basis[b])
    return out


def _complex_hyperbolic_reference() -> dict:
    from .group import make_space

    ref = make_space(1, 1)
    basis = np.eye(4)  # e1, E_1 e1 = e2, f1, T
    return _plane_curvatures(ref, basis)


def totally_geodesic_check(space: Space, X0, Z0, unit_tol: float = 1e-12) -> TotallyGeodesicReport:
    """Second fundamental form of the subgroup generated by X0, J_Z0 X0, Z0, T."""
    X0 = np.asarray(X0, dtype=float)
    Z0 = np.asarray(Z0, dtype=float)
    if abs(np.linalg.norm(X0) - 1.0) > unit_tol or abs(np.linalg.norm(Z0) - 1.0) > unit_tol:
        raise ValueError("X0 and Z0 must be unit vectors")
    m, k, n = space.m, space.k, space.dim
    basis = np.zeros((4, n))
    basis[0, :m] = X0
    basis[1, :m] = j_map(space.algebra, Z0, X0)
    basis[2, m:m + k] = Z0
    basis[3, -1] = 1.0

    cd = curvature(space)
    # nabla_U V for all pairs, then remove the tangential part
    nab = np.einsum("ai,bj,ijl->abl", basis, basis, cd.gamma)
    proj = basis.T @ np.linalg.solve(basis @ basis.T, basis)
    normal = nab - nab @ proj.T
    sff = float(np.abs(normal).max())

    from .algebra import bracket

    br = bracket(space.algebra, basis[0, :m], basis[1, :m])
    closure = float(np.linalg.norm(br - (br @ Z0) * Z0))

    DR_sub = np.einsum("ua,vi,wj,yl,aijpl->uvwyp", basis, basis, basis, basis, cd.DR, optimize=True)
    return TotallyGeodesicReport(
        second_fundamental_form=sff,
        closure=closure,
        sectional=_plane_curvatures(space, basis),
        reference_sectional=_complex_hyperbolic_reference(),
        nabla_R_restricted=float(np.linalg.norm(DR_sub)),
    )


# --------------------------------------------------------------------------
# ball chart
# --------------------------------------------------------------------------


def _check_ball(b: np.ndarray, max_radius: float):
    r2 = np.einsum("...i,...i", b, b)
    if np.any(r2 >= 1.0):
        raise DomainError("point outside the open unit ball")
    if np.any(r2 > max_radius**2):
        raise ConditioningError(
            f"ball radius {np.sqrt(r2.max()):.6f} exceeds the conditioning bound {max_radius}"
        )


def metric_at_ball(space: Space, b, max_radius: float = MAX_BALL_RADIUS) -> np.ndarray:
    """Left-invariant metric pulled back to ball coordinates.

    ``b`` is a BallPoint or an array of shape (..., dim); the result has shape
    (..., dim, dim).  With phi = ball_to_group the matrix is
    Dphi^T DL^T G DL Dphi where DL is the differential of left translation by
    phi(b)^-1, which carries the tangent space at phi(b) to the identity.
    """
    coords = b.coords if isinstance(b, BallPoint) else np.asarray(b, dtype=float)
    _check_ball(coords, max_radius)
    s = ball_to_group_coords(space, coords)
    DL = left_translation_differential(space, inverse_coords(space, s))
    M = DL @ ball_to_group_jacobian(space, coords)
    Mt = np.swapaxes(M, -1, -2)
    g = Mt @ M if space.gram is None else Mt @ space.gram @ M
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def _metric_derivatives(space: Space, x: np.ndarray, rel_step: float):
    """g(x) and dg[..., l, i, j] = d g_ij / d x_l by central differences.

    ``x`` has shape (..., dim); the step is relative to max(1, |x|_inf), which
    is 1 everywhere inside the ball.
    """
    n = space.dim
    h = rel_step * max(1.0, float(np.abs(x).max()))
    shift = h * np.eye(n)
    pts = np.concatenate([x[..., None, :], x[..., None, :] + shift, x[..., None, :] - shift], axis=-2)
    gs = metric_at_ball(space, pts)
    dg = (gs[..., 1:n + 1, :, :] - gs[..., n + 1:, :, :]) / (2.0 * h)
    return gs[..., 0, :, :], dg


def christoffel_at_ball(space: Space, b, rel_step: float = 1e-5) -> np.ndarray:
    """Gamma^k_ij in ball coordinates, shape (k, i, j)."""
    x = b.coords if isinstance(b, BallPoint) else np.asarray(b, dtype=float)
    g, dg = _metric_derivatives(space, x, rel_step)
    # first kind: [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0))
    return np.einsum("kl,ijl->kij", np.linalg.inv(g), first)


def _geodesic_acceleration(space: Space, x: np.ndarray, v: np.ndarray, rel_step: float) -> np.ndarray:
    g, dg = _metric_derivatives(space, x, rel_step)
    # Gamma_{l,ij} v^i v^j = (d_v g)_{jl} v^j - 1/2 (d_l g)(v, v)
    # dg @ v contracts the last index j; (d_l g)(v, v) follows from one more product
    dgv = (dg @ v[..., None, :, None])[..., 0]  # [..., l, i] = sum_j d_l g_ij v_j
    first = (v[..., None, :] @ dgv)[..., 0, :]  # [..., i] = sum_l v_l (d_l g v)_i
    quad = (dgv @ v[..., :, None])[..., 0]  # [..., l] = (d_l g)(v, v)
    rhs = first - 0.5 * quad
    return -np.linalg.solve(g, rhs[..., None])[..., 0]


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    direction: np.ndarray
    arc: np.ndarray  # arc-length stamps
    points: np.ndarray  # (N, dim) ball coordinates
    velocities: np.ndarray
    truncated: bool
    speed_error: float  # max | |v|_g - 1 |

    def transverse_deviation(self) -> float:
        """Max distance of the path from the line through the origin along
        the initial direction, in ball coordinates."""
        w = self.direction
        along = self.points @ w
        return float(np.linalg.norm(self.points - along[:, None] * w, axis=1).max())

    def distance_error(self) -> float:
        """Max |rho(r(s)) - s| along the path."""
        r = np.linalg.norm(self.points, axis=1)
        return float(np.abs(2.0 * np.arctanh(r) - self.arc).max())

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def geodesic_fan(
    space: Space,
    directions,
    length: float,
    step: float = 1e-3,
    rel_step: float = 1e-5,
    max_radius: float = MAX_BALL_RADIUS,
) -> list:
    """Unit-speed geodesics from the origin for several directions at once.

    Classical fixed-step RK4 on the geodesic equation with Christoffel symbols
    from central differences of :func:`metric_at_ball`.  Each initial velocity
    is direction / 2, of unit length for the metric 4 I at the origin.  A path
    whose next step would pass ``max_radius`` stops there and is flagged
    ``truncated``.
    """
    W = np.atleast_2d(np.asarray(directions, dtype=float))
    if np.abs(np.linalg.norm(W, axis=1) - 1.0).max() > 1e-12:
        raise ValueError("directions must be unit vectors")
    if step <= 0 or length < 0:
        raise ValueError("step must be positive and length nonnegative")
    n = space.dim
    n_steps = int(np.ceil(length / step - 1e-12)) if length > 0 else 0
    h = length / n_steps if n_steps else 0.0

    def rhs(state):
        x, v = state[:, :n], state[:, n:]
        return np.concatenate([v, _geodesic_acceleration(space, x, v, rel_step)], axis=1)

    # stage points stay well inside max_radius while the accepted state does
    guard = max_radius - 4.0 * h

    state = np.concatenate([np.zeros_like(W), 0.5 * W], axis=1)
    history = np.empty((n_steps + 1,) + state.shape)
    history[0] = state
    last = np.full(len(W), n_steps)
    active = np.ones(len(W), dtype=bool)
    for i in range(n_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            history[i + 1:] = history[i]
            break
        y = state[idx]
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        state[idx] = y
        history[i + 1] = state
        out = np.linalg.norm(state[:, :n], axis=1) > guard
        stop = active & out
        last[stop] = i + 1
        active &= ~out

    paths = []
    for j in range(len(W)):
        traj = history[: last[j] + 1, j]
        pts, vel = traj[:, :n], traj[:, n:]
        g = metric_at_ball(space, pts, max_radius)
        speed = np.sqrt(np.einsum("ni,nij,nj->n", vel, g, vel))
        paths.append(GeodesicPath(
            direction=W[j].copy(),
            arc=h * np.arange(last[j] + 1),
            points=pts,
            velocities=vel,
            truncated=bool(last[j] < n_steps),
            speed_error=float(np.abs(speed - 1.0).max()),
        ))
    return paths


def geodesic_integrate(space: Space, direction, length: float, step: float = 1e-3, **kwargs) -> GeodesicPath:
    """Unit-speed geodesic from the origin in ball coordinates; see :func:`geodesic_fan`."""
    direction = np.asarray(direction, dtype=float)
    if direction.ndim != 1:
        raise ValueError("use geodesic_fan for several directions")
    return geodesic_fan(space, direction[None], length, step, **kwargs)[0]


def distance_from_origin(space: Space, b) -> float:
    """rho = log((1 + r)/(1 - r)) for r the Euclidean radius of b."""
    coords = b.coords if isinstance(b, BallPoint) else np.asarray(b, dtype=float)
    r = float(np.linalg.norm(coords))
    if r >= 1.0:
        raise DomainError("point outside the open unit ball")
    return float(2.0 * np.arctanh(r))
