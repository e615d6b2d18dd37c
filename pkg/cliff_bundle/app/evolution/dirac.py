"""1+1D Dirac evolution on a periodic lattice with 2-component spinors.

H_D = c alpha (-i hbar d_x - e A_1 / c) + beta m c^2 + e A_0 with alpha = gamma^0 gamma^1
and beta = gamma^0 from the mostly-minus Cl(1,1) set (alpha = sigma_x, beta = sigma_z).
On a curved diagonal chart the same alpha and beta act on the density-weighted spinor.
"""

from __future__ import annotations

import numpy as np

from app.algebra.gamma_repr import MatrixRep, dirac_gammas
from app.core.errors import DimensionMismatchError, SignatureError, SingularMetricError
from app.core.linalg import periodic_central_difference, require_hermitian
from app.core.logger import logger
from app.core.models import EvolutionConfig
from app.evolution.propagators import LatticeState, Trajectory, evolve_static
from app.geometry.metrics import ChartMetric


def dirac_matrices(rep: MatrixRep | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(alpha, beta) for a 2D mostly-minus representation."""
    rep = rep or dirac_gammas("mostly-minus", dim=2)
    if rep.n != 2 or rep.size != 2:
        raise DimensionMismatchError(f"1+1D Dirac needs a 2x2 representation of 2 gammas, got n={rep.n} size={rep.size}")
    beta = rep.gammas[0]
    return beta @ rep.gammas[1], beta


def _site_potential(values: list[float] | None, n: int) -> np.ndarray:
    if values is None:
        return np.zeros(n)
    values = np.asarray(values, dtype=float)
    if values.shape != (n,):
        raise DimensionMismatchError(f"potential has {values.size} samples, lattice has {n}")
    return values


def dirac_hamiltonian(n: int, dx: float, cfg: EvolutionConfig, rep: MatrixRep | None = None) -> np.ndarray:
    alpha, beta = dirac_matrices(rep)
    d = periodic_central_difference(n, dx)
    a0 = _site_potential(cfg.a0, n)
    a1 = _site_potential(cfg.a1, n)
    kinetic = cfg.c * np.kron(-1j * cfg.hbar * d - (cfg.e / cfg.c) * np.diag(a1), alpha)
    mass = cfg.m * cfg.c**2 * np.kron(np.eye(n), beta)
    scalar = cfg.e * np.kron(np.diag(a0), np.eye(2))
    return require_hermitian(kinetic + mass + scalar, what="dirac hamiltonian")


def chart_factors(metric: ChartMetric, n: int, dx: float, time: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Lapse N = sqrt|g_00| and spatial scale A = sqrt|g_11| at the sites (time, i dx) of a diagonal (t, x) chart."""
    if metric.n != 2:
        raise DimensionMismatchError(f"1+1D Dirac needs a two-dimensional chart, got n={metric.n}")
    pts = np.stack([np.full(n, float(time)), np.arange(n) * dx], axis=-1)
    g = metric.field(pts)
    if np.any(np.abs(g[:, 0, 1]) > 1e-12 * np.max(np.abs(g))):
        raise SignatureError(f"metric {metric.name} is not diagonal in (t, x) at t={time}")
    lapse, scale = np.sqrt(np.abs(g[:, 0, 0])), np.sqrt(np.abs(g[:, 1, 1]))
    if np.min(lapse) <= 0.0 or np.min(scale) <= 0.0 or not np.all(np.isfinite(g)):
        raise SingularMetricError(f"metric {metric.name} degenerates on the lattice at t={time}")
    return lapse, scale


def curved_dirac_hamiltonian(
    n: int,
    dx: float,
    cfg: EvolutionConfig,
    metric: ChartMetric,
    time: float = 0.0,
    rep: MatrixRep | None = None,
) -> np.ndarray:
    """Dirac Hamiltonian on a diagonal 1+1 chart, acting on the density-weighted spinor chi = sqrt(A) psi.

    H = c alpha ({v, -i hbar d_x} / 2 - e v A_1 / c) + beta m c^2 N + e A_0 with v = N / A.
    The spin connection drops out in the weighted field, and sum chi^dagger chi dx is the
    conserved charge. A flat chart gives back dirac_hamiltonian.
    """
    alpha, beta = dirac_matrices(rep)
    lapse, scale = chart_factors(metric, n, dx, time)
    v = np.diag(lapse / scale)
    d = periodic_central_difference(n, dx)
    a0 = _site_potential(cfg.a0, n)
    a1 = _site_potential(cfg.a1, n)
    transport = -0.5j * cfg.hbar * (v @ d + d @ v) - (cfg.e / cfg.c) * v @ np.diag(a1)
    kinetic = cfg.c * np.kron(transport, alpha)
    mass = cfg.m * cfg.c**2 * np.kron(np.diag(lapse), beta)
    scalar = cfg.e * np.kron(np.diag(a0), np.eye(2))
    return require_hermitian(kinetic + mass + scalar, what="curved dirac hamiltonian")


def dirac_evolve_1p1(
    state: LatticeState,
    cfg: EvolutionConfig,
    rep: MatrixRep | None = None,
    record_every: int = 1,
) -> Trajectory:
    if state.components != 2:
        raise DimensionMismatchError(f"1+1D Dirac state needs 2 components, got {state.components}")
    h = dirac_hamiltonian(state.n, state.dx, cfg, rep)
    logger.debug(f"dirac evolve n={state.n} dx={state.dx} dt={cfg.dt} steps={cfg.steps} m={cfg.m}")
    return evolve_static(h, state, cfg.dt, cfg.steps, cfg.hbar, record_every)


def chiral_spinor(chirality: str, rep: MatrixRep | None = None) -> np.ndarray:
    """Unit eigenvector of alpha: +1 for right movers, -1 for left movers; 'none' gives (1, 0)."""
    if chirality == "none":
        return np.array([1.0, 0.0], dtype=complex)
    alpha, _ = dirac_matrices(rep)
    w, v = np.linalg.eigh(alpha)
    vec = v[:, int(np.argmax(w))] if chirality == "right" else v[:, int(np.argmin(w))]
    pivot = vec[np.flatnonzero(np.abs(vec) > 1e-12)[0]]
    return vec * (abs(pivot) / pivot)
