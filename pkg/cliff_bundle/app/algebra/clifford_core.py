"""Real Clifford algebras Cl(p, q) on an orthonormal blade basis.

Blades are bitmasks over the n generators (bit i set means e_{i+1} is a factor),
ordered lexicographically by bitmask. Generators 0..p-1 square to +1 and
p..n-1 square to -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence

import numpy as np

from app.core.errors import (
    CapacityError,
    CliffordRelationError,
    GradeError,
    LinearDependenceError,
    SignatureMismatchError,
)
from app.core.linalg import anticomm, frobenius
from app.core.logger import logger


TABLE_MAX_DIM = 12
ON_THE_FLY_MAX_DIM = 20
_TABLE_ROW_CHUNK = 256


@dataclass(frozen=True)
class Signature:
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0:
            raise ValueError(f"signature counts must be >= 0, got p={self.p} q={self.q}")
        if self.p + self.q < 1:
            raise ValueError("signature needs at least one generator")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def negative_mask(self) -> int:
        return ((1 << self.q) - 1) << self.p

    def square(self, i: int) -> int:
        return 1 if i < self.p else -1

    def metric(self) -> np.ndarray:
        return np.diag([float(self.square(i)) for i in range(self.n)])


def _popcount(x: np.ndarray, bits: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    count = np.zeros_like(x)
    for k in range(bits):
        count += (x >> k) & 1
    return count


def blade_sign(a: np.ndarray | int, b: np.ndarray | int, sig: Signature) -> np.ndarray:
    """Sign of e_A e_B = sign * e_(A xor B), vectorized over integer arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n = sig.n
    swaps = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    shifted = a >> 1
    for _ in range(n):
        swaps += _popcount(shifted & b, n)
        shifted = shifted >> 1
    negatives = _popcount(a & b & sig.negative_mask, n)
    return np.where((swaps + negatives) % 2 == 0, 1, -1).astype(np.int8)


@dataclass(frozen=True, eq=False)
class BladeSignTable:
    signs: np.ndarray

    @classmethod
    def build(cls, sig: Signature) -> "BladeSignTable":
        dim = sig.dim
        signs = np.empty((dim, dim), dtype=np.int8)
        cols = np.arange(dim, dtype=np.int64)
        for start in range(0, dim, _TABLE_ROW_CHUNK):
            rows = np.arange(start, min(start + _TABLE_ROW_CHUNK, dim), dtype=np.int64)
            signs[rows] = blade_sign(rows[:, None], cols[None, :], sig)
        signs.setflags(write=False)
        return cls(signs=signs)

    def lookup(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.signs[np.ix_(a, b)]


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    signature: Signature
    table: BladeSignTable | None
    grades: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.signature.n

    @property
    def dim(self) -> int:
        return self.signature.dim

    def signs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.table is not None:
            return self.table.lookup(a, b)
        return blade_sign(a[:, None], b[None, :], self.signature)

    def same_as(self, other: "AlgebraSpec") -> bool:
        return self.signature == other.signature

    # constructors for multivectors in this algebra
    def zero(self) -> "Multivector":
        return Multivector(self, np.zeros(self.dim))

    def scalar(self, value: float) -> "Multivector":
        coeffs = np.zeros(self.dim)
        coeffs[0] = value
        return Multivector(self, coeffs)

    def blade(self, index: int, value: float = 1.0) -> "Multivector":
        if not 0 <= index < self.dim:
            raise ValueError(f"blade index {index} outside [0, {self.dim})")
        coeffs = np.zeros(self.dim)
        coeffs[index] = value
        return Multivector(self, coeffs)

    def generator(self, i: int) -> "Multivector":
        if not 0 <= i < self.n:
            raise ValueError(f"generator index {i} outside [0, {self.n})")
        return self.blade(1 << i)

    def vector(self, components: Sequence[float]) -> "Multivector":
        if len(components) != self.n:
            raise ValueError(f"expected {self.n} vector components, got {len(components)}")
        coeffs = np.zeros(self.dim)
        for i, value in enumerate(components):
            coeffs[1 << i] = value
        return Multivector(self, coeffs)

    def random(self, rng: np.random.Generator, scale: float = 1.0) -> "Multivector":
        return Multivector(self, scale * rng.standard_normal(self.dim))


def make_algebra(p: int, q: int, allow_on_the_fly: bool = False) -> AlgebraSpec:
    """Build Cl(p, q) with precomputed blade sign tables.

    Tables are kept up to n = 12 (2^24 entries). Larger algebras need
    allow_on_the_fly=True and compute signs per product.
    """
    sig = Signature(p, q)
    if sig.n > TABLE_MAX_DIM and not allow_on_the_fly:
        raise CapacityError(
            f"Cl({p},{q}) has n={sig.n} > {TABLE_MAX_DIM}; table would need 2^{2 * sig.n} entries"
        )
    if sig.n > ON_THE_FLY_MAX_DIM:
        raise CapacityError(f"Cl({p},{q}) has n={sig.n} > {ON_THE_FLY_MAX_DIM}")

    table = BladeSignTable.build(sig) if sig.n <= TABLE_MAX_DIM else None
    grades = _popcount(np.arange(sig.dim, dtype=np.int64), sig.n)
    grades.setflags(write=False)
    logger.debug(f"algebra built p={p} q={q} dim={sig.dim} table={'yes' if table is not None else 'on-the-fly'}")
    return AlgebraSpec(signature=sig, table=table, grades=grades)


@dataclass(frozen=True, eq=False)
class Multivector:
    algebra: AlgebraSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.algebra.dim,):
            raise ValueError(f"expected {self.algebra.dim} coefficients, got shape {coeffs.shape}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def sig(self) -> Signature:
        return self.algebra.signature

    def _check(self, other: "Multivector") -> None:
        if not self.algebra.same_as(other.algebra):
            raise SignatureMismatchError(
                f"signature mismatch: Cl({self.sig.p},{self.sig.q}) vs Cl({other.sig.p},{other.sig.q})"
            )

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return Multivector(self.algebra, self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return Multivector(self.algebra, self.coeffs - other.coeffs)

    def __neg__(self) -> "Multivector":
        return Multivector(self.algebra, -self.coeffs)

    def __mul__(self, other: Any) -> "Multivector":
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        return Multivector(self.algebra, self.coeffs * float(other))

    def __rmul__(self, other: Any) -> "Multivector":
        return Multivector(self.algebra, self.coeffs * float(other))

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(self.coeffs[i]) for i in np.flatnonzero(self.coeffs)}

    def allclose(self, other: "Multivector", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= atol)

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def __repr__(self) -> str:
        terms = [f"{v:+.6g}*{blade_name(i, self.sig.n)}" for i, v in self.as_dict().items()]
        return f"Multivector(Cl({self.sig.p},{self.sig.q}): {' '.join(terms) or '0'})"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    alg = a.algebra
    ia = np.flatnonzero(a.coeffs)
    ib = np.flatnonzero(b.coeffs)
    if ia.size == 0 or ib.size == 0:
        return alg.zero()
    signs = alg.signs(ia, ib)
    targets = ia[:, None] ^ ib[None, :]
    weights = signs * np.outer(a.coeffs[ia], b.coeffs[ib])
    out = np.bincount(targets.ravel(), weights=weights.ravel(), minlength=alg.dim)
    return Multivector(alg, out)


def anticommutator(a: Multivector, b: Multivector) -> Multivector:
    return geometric_product(a, b) + geometric_product(b, a)


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= a.sig.n:
        raise GradeError(f"grade {k} outside [0, {a.sig.n}]")
    return Multivector(a.algebra, np.where(a.algebra.grades == k, a.coeffs, 0.0))


def scalar_part(a: Multivector) -> float:
    return float(a.coeffs[0])


def reverse(a: Multivector) -> Multivector:
    k = a.algebra.grades
    signs = np.where((k * (k - 1) // 2) % 2 == 0, 1.0, -1.0)
    return Multivector(a.algebra, a.coeffs * signs)


def blade_name(index: int, n: int) -> str:
    if index == 0:
        return "1"
    labels = [str(i + 1) for i in range(n) if index >> i & 1]
    return "e" + ("".join(labels) if n < 10 else "_".join(labels))


def blade_associativity_violations(alg: AlgebraSpec, max_dim: int = 8) -> int:
    """Brute-force count of blade triples where (ab)c and a(bc) differ in sign."""
    if alg.n > max_dim:
        raise CapacityError(f"brute-force associativity limited to n <= {max_dim}")
    idx = np.arange(alg.dim, dtype=np.int64)
    a = idx[:, None, None]
    b = idx[None, :, None]
    c = idx[None, None, :]
    sig = alg.signature
    left = blade_sign(a, b, sig).astype(np.int64) * blade_sign(a ^ b, c, sig)
    right = blade_sign(b, c, sig).astype(np.int64) * blade_sign(a, b ^ c, sig)
    return int(np.count_nonzero(left != right))


def generator_relation_residual(alg: AlgebraSpec) -> int:
    """Integer residual of e_i e_j + e_j e_i = 2 g_ij over all generator pairs."""
    residual = 0
    g = alg.signature.metric()
    for i in range(alg.n):
        for j in range(alg.n):
            ac = anticommutator(alg.generator(i), alg.generator(j))
            expected = alg.scalar(2.0 * g[i, j])
            residual = max(residual, int(round(np.max(np.abs(ac.coeffs - expected.coeffs)))))
    return residual


# --- matrix representations -------------------------------------------------


class GammaSet(Protocol):
    gammas: np.ndarray
    metric: np.ndarray


@dataclass
class IsomorphismReport:
    signature: tuple[int, int]
    relation_residual: float
    relations_ok: bool
    blade_count: int
    rank: int
    independent: bool
    matrix_dimension: int
    field: str
    isomorphism: bool
    messages: list[str] = field(default_factory=list)

    def raise_for_failure(self) -> None:
        if not self.relations_ok:
            raise CliffordRelationError(
                f"clifford relations violated: residual={self.relation_residual:.3e}"
            )
        if not self.independent:
            raise LinearDependenceError(
                f"blade images are linearly dependent: rank={self.rank} < {self.blade_count}"
            )


def _ordered_generators(alg: AlgebraSpec, rep: GammaSet) -> np.ndarray:
    metric = np.asarray(rep.metric, dtype=float)
    if metric.ndim == 2:
        if np.any(metric != np.diag(np.diag(metric))):
            raise SignatureMismatchError("representation metric must be diagonal")
        metric = np.diag(metric)
    gammas = np.asarray(rep.gammas)
    if gammas.shape[0] != alg.n or metric.size != alg.n:
        raise SignatureMismatchError(f"representation has {gammas.shape[0]} generators, algebra needs {alg.n}")
    positives = int(np.count_nonzero(metric > 0))
    if positives != alg.signature.p:
        raise SignatureMismatchError(
            f"representation signature ({positives},{alg.n - positives}) does not match "
            f"Cl({alg.signature.p},{alg.signature.q})"
        )
    order = np.argsort(-np.sign(metric), kind="stable")
    return gammas[order]


def blade_images(alg: AlgebraSpec, generators: np.ndarray) -> np.ndarray:
    """Matrix image of every blade: ordered product of its generator matrices."""
    k = generators.shape[-1]
    images = np.empty((alg.dim, k, k), dtype=np.result_type(generators, float))
    for index in range(alg.dim):
        m = np.eye(k, dtype=images.dtype)
        for i in range(alg.n):
            if index >> i & 1:
                m = m @ generators[i]
        images[index] = m
    return images


def check_matrix_isomorphism(alg: AlgebraSpec, rep: GammaSet, tol: float = 1e-12) -> IsomorphismReport:
    """Check that a matrix representation is faithful to Cl(p, q).

    Verifies the generator relations, the real linear independence of the 2^n
    blade images, and whether their span fills the whole matrix algebra.
    """
    gens = _ordered_generators(alg, rep)
    g = alg.signature.metric()
    k = gens.shape[-1]
    identity = np.eye(k)

    residual = 0.0
    for i in range(alg.n):
        for j in range(alg.n):
            residual = max(residual, frobenius(anticomm(gens[i], gens[j]) - 2.0 * g[i, j] * identity))
    relations_ok = residual <= tol

    images = blade_images(alg, gens)
    is_real = bool(np.all(np.abs(np.imag(images)) == 0.0))
    flat = images.reshape(alg.dim, -1)
    vectors = np.real(flat) if is_real else np.hstack([np.real(flat), np.imag(flat)])
    rank = int(np.linalg.matrix_rank(vectors, tol=1e-9))
    independent = rank == alg.dim
    matrix_dimension = k * k if is_real else 2 * k * k

    messages: list[str] = []
    if not relations_ok:
        messages.append(f"relation residual {residual:.3e} exceeds {tol:.1e}")
    if not independent:
        messages.append(f"blade images span rank {rank} < {alg.dim}")

    report = IsomorphismReport(
        signature=(alg.signature.p, alg.signature.q),
        relation_residual=residual,
        relations_ok=relations_ok,
        blade_count=alg.dim,
        rank=rank,
        independent=independent,
        matrix_dimension=matrix_dimension,
        field="real" if is_real else "complex",
        isomorphism=relations_ok and independent and rank == matrix_dimension,
        messages=messages,
    )
    logger.debug(
        f"isomorphism check sig={report.signature} residual={residual:.2e} rank={rank} "
        f"target={matrix_dimension} iso={report.isomorphism}"
    )
    return report


# --- serialization ----------------------------------------------------------


def multivector_to_json(a: Multivector) -> dict[str, Any]:
    return {"sig": [a.sig.p, a.sig.q], "coeffs": {str(i): v for i, v in a.as_dict().items()}}


def multivector_from_json(data: dict[str, Any], alg: AlgebraSpec | None = None) -> Multivector:
    p, q = (int(v) for v in data["sig"])
    if alg is None:
        alg = make_algebra(p, q)
    elif alg.signature != Signature(p, q):
        raise SignatureMismatchError(f"json multivector is Cl({p},{q}), algebra is {alg.signature}")
    coeffs = np.zeros(alg.dim)
    for key, value in data.get("coeffs", {}).items():
        index = int(key)
        if not 0 <= index < alg.dim:
            raise ValueError(f"blade index {index} outside [0, {alg.dim})")
        coeffs[index] = float(value)
    return Multivector(alg, coeffs)
