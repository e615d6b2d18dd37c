"""Gamma-matrix representations, the SL(2,C) spinor embedding and spin rotations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal, Sequence

import numpy as np

from app.core.errors import (
    CliffordRelationError,
    DeterminantError,
    DimensionMismatchError,
    PlaneError,
    SingularMetricError,
)
from app.core.linalg import anticomm, comm, expm, frobenius
from app.core.logger import logger


Convention = Literal["mostly-minus", "mostly-plus"]

_CONVENTION_ALIASES = {
    "mm": "mostly-minus",
    "mostly-minus": "mostly-minus",
    "mp": "mostly-plus",
    "mostly-plus": "mostly-plus",
}

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

RELATION_TOL = 1e-12
DET_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixRep:
    gammas: np.ndarray
    metric: np.ndarray
    convention: str = "custom"

    def __post_init__(self) -> None:
        gammas = np.array(self.gammas, dtype=complex)
        metric = np.array(self.metric, dtype=float)
        if metric.ndim == 1:
            metric = np.diag(metric)
        if gammas.ndim != 3 or gammas.shape[1] != gammas.shape[2]:
            raise DimensionMismatchError(f"gammas must be a stack of square matrices, got shape {gammas.shape}")
        if metric.shape != (gammas.shape[0], gammas.shape[0]):
            raise DimensionMismatchError(f"metric shape {metric.shape} does not match {gammas.shape[0]} gammas")
        gammas.setflags(write=False)
        metric.setflags(write=False)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "metric", metric)

    @property
    def n(self) -> int:
        return int(self.gammas.shape[0])

    @property
    def size(self) -> int:
        return int(self.gammas.shape[1])

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.size, dtype=complex)

    def relation_residual(self) -> float:
        residual = 0.0
        for mu in range(self.n):
            for nu in range(self.n):
                target = 2.0 * self.metric[mu, nu] * self.identity
                residual = max(residual, frobenius(anticomm(self.gammas[mu], self.gammas[nu]) - target))
        return residual

    def verify(self, tol: float = RELATION_TOL) -> "MatrixRep":
        residual = self.relation_residual()
        if residual > tol:
            raise CliffordRelationError(f"gamma relations violated: residual={residual:.3e} tol={tol:.1e}")
        return self

    def perturbed(self, magnitude: float, rng: np.random.Generator) -> "MatrixRep":
        noise = rng.standard_normal(self.gammas.shape) + 1j * rng.standard_normal(self.gammas.shape)
        return MatrixRep(self.gammas + magnitude * noise, self.metric, convention=f"{self.convention}+noise")


def normalize_convention(convention: str) -> Convention:
    try:
        return _CONVENTION_ALIASES[convention]  # type: ignore[return-value]
    except KeyError as exc:
        raise ValueError(f"unknown convention {convention!r}; use mostly-minus|mostly-plus|mm|mp") from exc


def minkowski_eta(n: int, convention: str = "mostly-minus") -> np.ndarray:
    sign = 1.0 if normalize_convention(convention) == "mostly-minus" else -1.0
    return np.diag([sign] + [-sign] * (n - 1))


def _dirac_mostly_minus_4d() -> np.ndarray:
    zero = np.zeros((2, 2), dtype=complex)
    g0 = np.block([[I2, zero], [zero, -I2]])
    spatial = [np.block([[zero, s], [-s, zero]]) for s in PAULI]
    return np.stack([g0, *spatial])


def _dirac_mostly_minus_2d() -> np.ndarray:
    # alpha = g0 g1 = sigma_x, beta = g0 = sigma_z
    return np.stack([SIGMA_Z, 1j * SIGMA_Y])


def dirac_gammas(convention: str = "mostly-minus", dim: int = 4) -> MatrixRep:
    """Standard Dirac basis (diagonal gamma^0 block form).

    The mostly-plus set is i times the mostly-minus one, which flips every
    generator square.
    """
    convention = normalize_convention(convention)
    if dim == 4:
        gammas = _dirac_mostly_minus_4d()
    elif dim == 2:
        gammas = _dirac_mostly_minus_2d()
    else:
        raise DimensionMismatchError(f"dirac gammas exist for dim 2 or 4, got {dim}")
    if convention == "mostly-plus":
        gammas = 1j * gammas
    return MatrixRep(gammas, minkowski_eta(dim, convention), convention=convention).verify()


def _euclidean_set(n: int) -> np.ndarray:
    if n == 1:
        return np.ones((1, 1, 1), dtype=complex)
    if n == 2:
        return np.stack([SIGMA_Z, -SIGMA_Y])
    if n == 3:
        return np.stack(PAULI)
    if n == 4:
        mm = _dirac_mostly_minus_4d()
        return np.stack([mm[0], *(1j * mm[1:])])
    raise DimensionMismatchError(f"gamma construction supports n <= 4, got {n}")


def gammas_for_metric(eta: Sequence[float] | np.ndarray) -> MatrixRep:
    """Representation for any diagonal +-1 signature with n <= 4."""
    eta = np.asarray(eta, dtype=float)
    diag = np.diag(eta) if eta.ndim == 2 else eta
    if not np.all(np.isin(diag, (-1.0, 1.0))):
        raise ValueError(f"eta must be diagonal with entries +-1, got {diag.tolist()}")
    base = _euclidean_set(diag.size)
    gammas = np.stack([g if s > 0 else -1j * g for g, s in zip(base, diag)])
    return MatrixRep(gammas, np.diag(diag), convention="custom").verify()


def real_cl31_gammas() -> MatrixRep:
    """Real 4x4 generators of Cl(3,1): three squaring to +1, one to -1."""
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    z = np.array([[1.0, 0.0], [0.0, -1.0]])
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    i2 = np.eye(2)
    gammas = np.stack([np.kron(x, i2), np.kron(z, i2), np.kron(j, j), np.kron(j, x)])
    return MatrixRep(gammas, np.diag([1.0, 1.0, 1.0, -1.0]), convention="real-cl31").verify()


def dual_gammas(rep: MatrixRep, g: np.ndarray | None = None) -> MatrixRep:
    """Raise indices: gamma^mu = g^{mu nu} gamma_nu."""
    g = rep.metric if g is None else np.asarray(g, dtype=float)
    if g.shape != (rep.n, rep.n):
        raise DimensionMismatchError(f"metric shape {g.shape} does not match {rep.n} gammas")
    if frobenius(g - g.T) > 1e-12 * max(1.0, frobenius(g)):
        raise ValueError("metric must be symmetric")
    if np.linalg.cond(g) > 1e12:
        raise SingularMetricError(f"metric is singular: cond={np.linalg.cond(g):.3e}")
    g_inv = np.linalg.inv(g)
    raised = np.einsum("mn,nab->mab", g_inv, rep.gammas)
    return MatrixRep(raised, g_inv, convention=f"{rep.convention}:raised")


def gamma_five(rep: MatrixRep) -> np.ndarray:
    """Chirality matrix: product of all generators, phased so it squares to +1."""
    if rep.n not in (2, 4):
        raise DimensionMismatchError(f"chirality matrix needs n = 2 or 4, got {rep.n}")
    product = rep.identity
    for g in rep.gammas:
        product = product @ g
    square = (product @ product)[0, 0]
    return product if np.real(square) > 0 else 1j * product


def spin_generator(rep: MatrixRep, j: int, k: int) -> np.ndarray:
    if j == k:
        raise PlaneError(f"plane indices must differ, got j=k={j}")
    for idx in (j, k):
        if not 0 <= idx < rep.n:
            raise PlaneError(f"plane index {idx} outside [0, {rep.n})")
    return 0.25 * comm(rep.gammas[j], rep.gammas[k])


def time_axes(rep: MatrixRep) -> tuple[int, ...]:
    """Timelike generator indices of a Lorentzian rep (the odd sign out, index 0 for n = 2); () otherwise."""
    signs = np.sign(np.real(np.diag(rep.metric)))
    if rep.n == 2 and signs[0] != signs[1]:
        return (0,)
    for sign in (1.0, -1.0):
        axes = np.flatnonzero(signs == sign)
        if axes.size == 1 and rep.n > 2:
            return (int(axes[0]),)
    return ()


@dataclass(frozen=True, eq=False)
class SpinorRotation:
    plane: tuple[int, int]
    angle: float
    generator: np.ndarray

    @classmethod
    def build(cls, rep: MatrixRep, plane: tuple[int, int], angle: float) -> "SpinorRotation":
        j, k = plane
        timelike = [idx for idx in (j, k) if idx in time_axes(rep)]
        if timelike:
            raise PlaneError(f"rotation plane {(j, k)} contains the time axis {timelike[0]}; use spin_boost")
        return cls(plane=(j, k), angle=float(angle), generator=spin_generator(rep, j, k))

    @property
    def matrix(self) -> np.ndarray:
        return expm(self.angle * self.generator)

    def determinant_residual(self) -> float:
        return float(abs(np.linalg.det(self.matrix) - 1.0))


def spin_rotate(rep: MatrixRep, plane: tuple[int, int], angle: float) -> np.ndarray:
    return SpinorRotation.build(rep, plane, angle).matrix


def spin_boost(rep: MatrixRep, axis: int, rapidity: float) -> np.ndarray:
    if axis == 0:
        raise PlaneError("boost axis must be spatial, got 0")
    return expm(rapidity * spin_generator(rep, 0, axis))


def lorentz_from_spinor(rep: MatrixRep, s: np.ndarray) -> np.ndarray:
    """Vector matrix Lambda induced by a spinor matrix S.

    With S^-1 gamma_mu S = L[mu, b] gamma_b, Lambda = inv(L).T so that
    S^-1 T(Lambda T Lambda^T) S = T(T) for the stress-energy contraction.
    """
    s = np.asarray(s, dtype=complex)
    s_inv = np.linalg.inv(s)
    upper = dual_gammas(rep).gammas
    n, k = rep.n, rep.size
    coeffs = np.empty((n, n), dtype=complex)
    for mu in range(n):
        moved = s_inv @ rep.gammas[mu] @ s
        for beta in range(n):
            coeffs[mu, beta] = np.trace(moved @ upper[beta]) / k
    if np.max(np.abs(coeffs.imag)) > 1e-9:
        logger.warning(f"spinor matrix does not induce a real lorentz map: imag={np.max(np.abs(coeffs.imag)):.2e}")
    return np.linalg.inv(coeffs.real).T


def sl2c_embed(a: np.ndarray) -> np.ndarray:
    """rho(A) = diag(A, (A^dagger)^-1) for det A = 1."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise DimensionMismatchError(f"sl2c element must be 2x2, got {a.shape}")
    det = np.linalg.det(a)
    if abs(det - 1.0) >= DET_TOL:
        raise DeterminantError(f"sl2c element needs det = 1, got det={det:.6g}")
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = a
    out[2:, 2:] = np.linalg.inv(a.conj().T)
    return out


def spin_transition(a_uv: np.ndarray, a_vw: np.ndarray | None = None, a_uw: np.ndarray | None = None) -> np.ndarray:
    """Spinor-bundle transition rho_UV from an SL(2,C) transition value.

    When the two further overlap values are given, the cocycle
    rho_UV rho_VW = rho_UW is checked as well.
    """
    rho_uv = sl2c_embed(a_uv)
    if a_vw is not None and a_uw is not None:
        residual = frobenius(rho_uv @ sl2c_embed(a_vw) - sl2c_embed(a_uw))
        if residual > 1e-10:
            raise DeterminantError(f"transition values violate the cocycle: residual={residual:.3e}")
    return rho_uv


def random_sl2c(rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    m = scale * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    m -= 0.5 * np.trace(m) * np.eye(2)
    return expm(m)


def rep_to_json(rep: MatrixRep) -> dict[str, Any]:
    def pairs(m: np.ndarray) -> list[list[list[float]]]:
        return [[[float(v.real), float(v.imag)] for v in row] for row in m]

    return {
        "convention": rep.convention,
        "n": rep.n,
        "size": rep.size,
        "metric": rep.metric.tolist(),
        "gammas": [pairs(g) for g in rep.gammas],
    }


def rep_from_json(data: dict[str, Any]) -> MatrixRep:
    raw = np.asarray(data["gammas"], dtype=float)
    if raw.ndim != 4 or raw.shape[-1] != 2:
        raise DimensionMismatchError(f"gammas must be [n][k][k][re, im], got shape {raw.shape}")
    gammas = raw[..., 0] + 1j * raw[..., 1]
    return MatrixRep(gammas, np.asarray(data["metric"], dtype=float), convention=data.get("convention", "custom"))
