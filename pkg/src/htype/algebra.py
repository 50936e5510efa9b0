"""Clifford-module generators and H-type (Heisenberg-type) algebras.

An H-type algebra n = v + z is determined by a real representation of the
Clifford algebra with generators E_1..E_k acting on v = R^m, where each E_i is
skew-symmetric and

    E_i E_j + E_j E_i = -2 delta_ij I.

The map J_Z = sum_i Z_i E_i then satisfies J_Z^2 = -|Z|^2 I and the bracket is
recovered from <J_Z X, Y> = <[X, Y], Z>.

Irreducible blocks are built explicitly for k = 1..8 (rotation of the plane,
left multiplication by unit quaternions and octonions, and one doubling
step for k = 8) and extended to larger k through the period-8 tensor
construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

__all__ = [
    "CliffordSpec",
    "CliffordModule",
    "HTypeAlgebra",
    "CliffordReport",
    "min_dimension",
    "build_module",
    "verify_clifford",
    "j_map",
    "bracket",
    "chirality_product",
]

# irreducible dimensions for k = 1..8; d(k + 8) = 16 d(k)
_BASE_DIMS = (2, 4, 4, 8, 8, 8, 8, 16)

CLIFFORD_TOL = 1e-12

Multiplicity = Union[int, "tuple[int, int]"]


def min_dimension(k: int) -> int:
    """Dimension of an irreducible real module of the Clifford algebra with k
    anticommuting generators squaring to -1."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"center dimension must be a positive integer, got {k!r}")
    q, r = divmod(int(k) - 1, 8)
    return _BASE_DIMS[r] * 16**q


def has_chirality(k: int) -> bool:
    return k % 4 == 3


@dataclass(frozen=True)
class CliffordSpec:
    """Center dimension plus multiplicity data.

    For k = 3 (mod 4) the multiplicity is a pair (n_plus, n_minus) counting the
    irreducible blocks on which E_1 E_2 ... E_k equals +I and -I respectively.
    Otherwise it is a single copy count.  A bare integer given for k = 3 (mod 4)
    is read as (n, 0).
    """

    k: int
    mult: Multiplicity = 1

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        mult = self.mult
        if has_chirality(self.k):
            if isinstance(mult, (int, np.integer)):
                mult = (int(mult), 0)
            mult = tuple(int(v) for v in mult)
            if len(mult) != 2:
                raise ValueError("chiral multiplicity must be a pair (n_plus, n_minus)")
        else:
            if not isinstance(mult, (int, np.integer)):
                raise ValueError(
                    f"k={self.k} has a single irreducible module; multiplicity must be an int"
                )
            mult = int(mult)
        object.__setattr__(self, "mult", mult)
        counts = mult if isinstance(mult, tuple) else (mult,)
        if any(c < 0 for c in counts):
            raise ValueError("multiplicities must be nonnegative")
        if sum(counts) < 1:
            raise ValueError("at least one multiplicity must be positive")

    @property
    def total(self) -> int:
        return sum(self.mult) if isinstance(self.mult, tuple) else self.mult

    @property
    def m(self) -> int:
        return self.total * min_dimension(self.k)

    @property
    def isotypic(self) -> bool:
        if isinstance(self.mult, tuple):
            return 0 in self.mult
        return True

    def label(self) -> str:
        if isinstance(self.mult, tuple):
            return f"k={self.k}, mult={self.mult[0]}+{self.mult[1]}"
        return f"k={self.k}, mult={self.mult}"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CliffordModule:
    k: int
    m: int
    generators: tuple  # k read-only (m, m) arrays
    stacked: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "stacked", _readonly(np.stack(self.generators)))


# --------------------------------------------------------------------------
# explicit irreducible blocks
# --------------------------------------------------------------------------

_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
_REFL = np.array([[1.0, 0.0], [0.0, -1.0]])


def _quat_mul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def _quat_conj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def _oct_mul(x, y):
    # Cayley-Dickson: (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))
    a, b = x[:4], x[4:]
    c, d = y[:4], y[4:]
    return np.concatenate([
        _quat_mul(a, c) - _quat_mul(_quat_conj(d), b),
        _quat_mul(d, a) + _quat_mul(b, _quat_conj(c)),
    ])


def _left_mult_matrices(mul, dim):
    basis = np.eye(dim)
    mats = []
    for i in range(1, dim):
        mats.append(np.column_stack([mul(basis[i], basis[j]) for j in range(dim)]))
    return mats


@lru_cache(maxsize=None)
def _irreducible(k: int) -> tuple:
    """Generators of one irreducible module (before chirality adjustment)."""
    if k == 1:
        return (_ROT.copy(),)
    if k in (2, 3):
        return tuple(_left_mult_matrices(_quat_mul, 4)[:k])
    if 4 <= k <= 7:
        return tuple(_left_mult_matrices(_oct_mul, 8)[:k])
    if k == 8:
        seven = _irreducible(7)
        gens = [np.kron(E, _REFL) for E in seven]
        gens.append(np.kron(np.eye(8), _ROT))
        return tuple(gens)
    # k > 8: E_i (x) omega for the inner factor, I (x) G_j for the k = 8 block,
    # where omega = G_1...G_8 is symmetric, squares to I and anticommutes with
    # each G_j.
    inner = _irreducible(k - 8)
    outer = _irreducible(8)
    omega = np.linalg.multi_dot(outer)
    d = inner[0].shape[0]
    gens = [np.kron(E, omega) for E in inner]
    gens.extend(np.kron(np.eye(d), G) for G in outer)
    return tuple(gens)


def chirality_product(generators) -> np.ndarray:
    """E_1 E_2 ... E_k."""
    gens = list(generators)
    if len(gens) == 1:
        return np.array(gens[0], dtype=float)
    return np.linalg.multi_dot(gens)


def _chiral_block(k: int, sign: int) -> list:
    gens = [g.copy() for g in _irreducible(k)]
    prod = chirality_product(gens)
    current = 1 if prod[0, 0] > 0 else -1
    if current != sign:
        gens[0] = -gens[0]
    return gens


def _block_diag(blocks: list) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    i = 0
    for b in blocks:
        n = b.shape[0]
        out[i : i + n, i : i + n] = b
        i += n
    return out


def build_module(spec: CliffordSpec) -> CliffordModule:
    """Direct sum of irreducible blocks described by ``spec``."""
    k = spec.k
    if isinstance(spec.mult, tuple):
        n_plus, n_minus = spec.mult
        blocks = [_chiral_block(k, 1)] * n_plus + [_chiral_block(k, -1)] * n_minus
    else:
        blocks = [list(_irreducible(k))] * spec.mult
    gens = tuple(_readonly(_block_diag([b[i] for b in blocks])) for i in range(k))
    return CliffordModule(k=k, m=gens[0].shape[0], generators=gens)


@dataclass(frozen=True)
class CliffordReport:
    skew: float
    square: list
    anticommute: float
    tol: float = CLIFFORD_TOL

    @property
    def max_deviation(self) -> float:
        return max([self.skew, self.anticommute, *self.square])

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def verify_clifford(module: CliffordModule, tol: float = CLIFFORD_TOL) -> CliffordReport:
    """Max absolute deviation of skewness, E_i^2 = -I and anticommutation."""
    E = module.stacked
    eye = np.eye(module.m)
    skew = float(np.abs(E + E.transpose(0, 2, 1)).max())
    square = [float(np.abs(Ei @ Ei + eye).max()) for Ei in E]
    anti = 0.0
    for i in range(module.k):
        for j in range(i + 1, module.k):
            anti = max(anti, float(np.abs(E[i] @ E[j] + E[j] @ E[i]).max()))
    return CliffordReport(skew=skew, square=square, anticommute=anti, tol=tol)


@dataclass(frozen=True, eq=False)
class HTypeAlgebra:
    """n = v + z with the standard inner product on R^m + R^k."""

    module: CliffordModule
    spec: CliffordSpec | None = field(default=None, compare=False)

    @classmethod
    def from_spec(cls, spec: CliffordSpec) -> "HTypeAlgebra":
        return _algebra_for(spec)

    @property
    def m(self) -> int:
        return self.module.m

    @property
    def k(self) -> int:
        return self.module.k

    @property
    def E(self) -> np.ndarray:
        return self.module.stacked

    def j_matrix(self, Z) -> np.ndarray:
        Z = _vec(Z, self.k, "Z")
        return np.tensordot(Z, self.E, axes=1)


@lru_cache(maxsize=None)
def _algebra_for(spec: CliffordSpec) -> HTypeAlgebra:
    return HTypeAlgebra(build_module(spec), spec)


def _vec(x, n, name) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise ValueError(f"{name} must have trailing dimension {n}, got shape {x.shape}")
    return x


def _apply_generators(alg: HTypeAlgebra, X: np.ndarray) -> np.ndarray:
    """Stack of E_i X with shape (..., k, m)."""
    return np.matmul(alg.E, X[..., None, :, None])[..., 0]


def j_map(alg: HTypeAlgebra, Z, X) -> np.ndarray:
    """J_Z X = sum_i Z_i E_i X.  Broadcasts over leading axes."""
    Z = _vec(Z, alg.k, "Z")
    X = _vec(X, alg.m, "X")
    return np.matmul(Z[..., None, :], _apply_generators(alg, X))[..., 0, :]


def bracket(alg: HTypeAlgebra, X, Y) -> np.ndarray:
    """[X, Y] in z, with components <E_i X, Y>."""
    X = _vec(X, alg.m, "X")
    Y = _vec(Y, alg.m, "Y")
    return np.matmul(_apply_generators(alg, X), Y[..., :, None])[..., 0]
