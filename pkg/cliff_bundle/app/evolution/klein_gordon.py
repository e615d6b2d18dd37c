"""Klein-Gordon fields through the two-component first-order reduction.

psi = (phi + (i hbar / m c^2) phi_t, phi - (i hbar / m c^2) phi_t) turns the
second-order equation into i hbar psi_t = H psi with
H = m c^2 tau_3 + (K / 2m) [[1, 1], [-1, -1]], K = -hbar^2 d_x^2 (or the
minimally coupled (-i hbar d_x - e A_1 / c)^2). H is not Hermitian in the
plain inner product, so the exact step exponential is used directly.
"""

from __future__ import annotations

import numpy as np

from app.core.errors import DimensionMismatchError, MassError
from app.core.linalg import periodic_central_difference, periodic_laplacian
from app.core.logger import logger
from app.core.models import EvolutionConfig
from app.evolution.propagators import LatticeState, Trajectory, evolve_static


TAU_3 = np.array([[1.0, 0.0], [0.0, -1.0]])
KINETIC_MIX = np.array([[1.0, 1.0], [-1.0, -1.0]])


def _require_mass(m: float) -> None:
    if m <= 0.0:
        raise MassError(f"two-component reduction needs m > 0, got m={m}")


def kg_first_order(
    phi: np.ndarray,
    phi_dot: np.ndarray,
    m: float,
    dx: float,
    hbar: float = 1.0,
    c: float = 1.0,
) -> LatticeState:
    _require_mass(m)
    phi = np.asarray(phi, dtype=complex)
    phi_dot = np.asarray(phi_dot, dtype=complex)
    if phi.shape != phi_dot.shape:
        raise DimensionMismatchError(f"phi shape {phi.shape} differs from phi_dot shape {phi_dot.shape}")
    scale = 1j * hbar / (m * c**2)
    return LatticeState(np.stack([phi + scale * phi_dot, phi - scale * phi_dot], axis=-1), dx)


def kg_from_first_order(state: LatticeState, m: float, hbar: float = 1.0, c: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Inverse map: phi = (psi1 + psi2)/2, phi_t = (m c^2 / i hbar)(psi1 - psi2)/2."""
    _require_mass(m)
    if state.components != 2:
        raise DimensionMismatchError(f"two-component state expected, got {state.components}")
    psi1, psi2 = state.data[:, 0], state.data[:, 1]
    phi = 0.5 * (psi1 + psi2)
    phi_dot = (m * c**2 / (1j * hbar)) * 0.5 * (psi1 - psi2)
    return phi, phi_dot


def kinetic_operator(n: int, dx: float, cfg: EvolutionConfig) -> np.ndarray:
    if cfg.a1 is None:
        return -(cfg.hbar**2) * periodic_laplacian(n, dx)
    a1 = np.asarray(cfg.a1, dtype=float)
    if a1.shape != (n,):
        raise DimensionMismatchError(f"a1 has {a1.size} samples, lattice has {n}")
    pi = -1j * cfg.hbar * periodic_central_difference(n, dx) - (cfg.e / cfg.c) * np.diag(a1)
    return pi @ pi


def kg_hamiltonian(n: int, dx: float, cfg: EvolutionConfig) -> np.ndarray:
    _require_mass(cfg.m)
    if cfg.a0 is not None and np.any(np.asarray(cfg.a0) != 0.0):
        raise ValueError("kg engine supports a static a1 only; a0 must be absent or zero")
    k = kinetic_operator(n, dx, cfg)
    return cfg.m * cfg.c**2 * np.kron(np.eye(n), TAU_3) + np.kron(k / (2.0 * cfg.m), KINETIC_MIX)


def kg_evolve(state: LatticeState, cfg: EvolutionConfig, record_every: int = 1) -> Trajectory:
    if state.components != 2:
        raise DimensionMismatchError(f"kg state needs 2 components, got {state.components}")
    h = kg_hamiltonian(state.n, state.dx, cfg)
    logger.debug(f"kg evolve n={state.n} dx={state.dx} dt={cfg.dt} steps={cfg.steps} m={cfg.m}")
    return evolve_static(h, state, cfg.dt, cfg.steps, cfg.hbar, record_every)


def kg_leapfrog(
    phi: np.ndarray,
    phi_dot: np.ndarray,
    m: float,
    dx: float,
    dt: float,
    steps: int,
    hbar: float = 1.0,
    c: float = 1.0,
    kinetic: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Velocity-Verlet for phi_tt = -(c / hbar)^2 K phi - (m c^2 / hbar)^2 phi.

    K is the site operator of kinetic_operator; without it K = -hbar^2 d_x^2 with the 3-point Laplacian.
    """
    phi = np.array(phi, dtype=complex)
    vel = np.array(phi_dot, dtype=complex)
    n = phi.size
    mass_term = (m * c**2 / hbar) ** 2
    idx = np.arange(n)
    up, down = (idx + 1) % n, (idx - 1) % n

    if kinetic is not None and np.shape(kinetic) != (n, n):
        raise DimensionMismatchError(f"kinetic operator has shape {np.shape(kinetic)}, lattice has {n} sites")

    def accel(f: np.ndarray) -> np.ndarray:
        if kinetic is not None:
            return -((c / hbar) ** 2) * (kinetic @ f) - mass_term * f
        return c**2 * (f[up] - 2.0 * f + f[down]) / dx**2 - mass_term * f

    a = accel(phi)
    for _ in range(steps):
        vel += 0.5 * dt * a
        phi += dt * vel
        a = accel(phi)
        vel += 0.5 * dt * a
    return phi, vel
