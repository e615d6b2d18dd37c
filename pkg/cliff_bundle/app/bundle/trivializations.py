"""Fibre trivializations l_x and the lift / conjugation operations built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import block_diag

from app.core.errors import SingularTrivializationError
from app.core.logger import logger
from app.core.models import TrivializationConfig


FibreMap = Callable[[np.ndarray], np.ndarray]

COND_LIMIT = 1e12
COND_WARN = 1e8


@dataclass(frozen=True, eq=False)
class Trivialization:
    dim: int
    l: FibreMap
    l_inv: FibreMap
    name: str = "custom"
    params: dict[str, float] = field(default_factory=dict)

    def matrices(self, x: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
        """(l_x, l_x^-1) with the condition-number guard applied."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lx = np.asarray(self.l(x), dtype=complex)
        if lx.shape != (self.dim, self.dim):
            raise SingularTrivializationError(f"trivialization {self.name} returned shape {lx.shape}")
        cond = np.linalg.cond(lx)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularTrivializationError(f"trivialization {self.name} singular at x={x.tolist()}: cond={cond:.3e}")
        if cond > COND_WARN:
            logger.warning(f"trivialization={self.name} ill-conditioned x={x.tolist()} cond={cond:.3e}")
        return lx, np.asarray(self.l_inv(x), dtype=complex)

    def residual(self, x: np.ndarray | float) -> float:
        lx, lx_inv = self.matrices(x)
        return float(np.max(np.abs(lx @ lx_inv - np.eye(self.dim))))

    def block(self, coords: Sequence[np.ndarray | float]) -> tuple[np.ndarray, np.ndarray]:
        """Block-diagonal l and l^-1 over lattice sites (site-major ordering)."""
        pairs = [self.matrices(x) for x in coords]
        return block_diag(*(p[0] for p in pairs)), block_diag(*(p[1] for p in pairs))


def identity_trivialization(dim: int) -> Trivialization:
    eye = np.eye(dim, dtype=complex)
    return Trivialization(dim, lambda x: eye, lambda x: eye, name="identity")


def scalar_trivialization(dim: int, c: float | complex) -> Trivialization:
    if c == 0:
        raise SingularTrivializationError("scalar trivialization needs c != 0")
    eye = np.eye(dim, dtype=complex)
    return Trivialization(dim, lambda x: c * eye, lambda x: eye / c, name=f"scalar:{c}", params={"c": float(abs(c))})


def random_smooth_trivialization(
    dim: int,
    n_coords: int = 1,
    seed: int = 0,
    amplitude: float = 0.2,
    wavenumber: float = 1.0,
) -> Trivialization:
    """l(x) = 1 + a s(x) u v^H with s(x) = sin(k . x + phase) and unit complex u, v.

    |a s(x) v^H u| <= a < 0.5, so 1 + a s v^H u never vanishes and the
    Sherman-Morrison inverse is always defined.
    """
    if not 0.0 <= amplitude < 0.5:
        raise SingularTrivializationError(f"amplitude must lie in [0, 0.5), got {amplitude}")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    k = wavenumber * rng.standard_normal(n_coords)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    outer = np.outer(u, v.conj())
    overlap = complex(v.conj() @ u)
    eye = np.eye(dim, dtype=complex)

    def weight(x: np.ndarray) -> float:
        return amplitude * float(np.sin(np.dot(k, np.atleast_1d(x)[: n_coords]) + phase))

    def l(x: np.ndarray) -> np.ndarray:
        return eye + weight(x) * outer

    def l_inv(x: np.ndarray) -> np.ndarray:
        w = weight(x)
        return eye - (w / (1.0 + w * overlap)) * outer

    return Trivialization(
        dim, l, l_inv, name=f"random_smooth:{seed}", params={"seed": float(seed), "amplitude": amplitude}
    )


def trivialization_from_config(cfg: TrivializationConfig, dim: int, n_coords: int = 1) -> Trivialization:
    if cfg.kind == "identity":
        return identity_trivialization(dim)
    if cfg.kind == "scalar":
        return scalar_trivialization(dim, cfg.c)
    return random_smooth_trivialization(dim, n_coords, seed=cfg.seed, amplitude=cfg.amplitude)


def lift_state(l: Trivialization, x: np.ndarray | float, psi: np.ndarray) -> np.ndarray:
    """Psi(x) = l_x^-1 psi(x)."""
    _, lx_inv = l.matrices(x)
    return lx_inv @ np.asarray(psi)


def project_state(l: Trivialization, x: np.ndarray | float, big_psi: np.ndarray) -> np.ndarray:
    lx, _ = l.matrices(x)
    return lx @ np.asarray(big_psi)


def conjugate_operator(l: Trivialization, x: np.ndarray | float, op: np.ndarray) -> np.ndarray:
    """l_x^-1 op l_x."""
    lx, lx_inv = l.matrices(x)
    return lx_inv @ np.asarray(op) @ lx
