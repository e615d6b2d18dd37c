"""Time-ordered propagation and the lattice state container shared by the engines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.core.errors import BoundaryError, StabilityError
from app.core.linalg import expm, require_hermitian, unitarity_residual
from app.core.logger import logger


STABILITY_LIMIT = 0.5


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Spinor (or scalar) values on a 1D lattice: data[i, c] at site i, component c."""

    data: np.ndarray
    dx: float
    boundary: str = "periodic"

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=complex)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ValueError(f"lattice state must be (sites, components), got shape {data.shape}")
        if self.dx <= 0.0:
            raise ValueError(f"dx must be > 0, got {self.dx}")
        if self.boundary != "periodic":
            raise BoundaryError(f"only periodic lattices are supported, got {self.boundary!r}")
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @property
    def components(self) -> int:
        return int(self.data.shape[1])

    @property
    def coordinates(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def norm(self) -> float:
        """sum |psi|^2 dx."""
        return float(np.sum(np.abs(self.data) ** 2) * self.dx)

    def with_flat(self, values: np.ndarray) -> "LatticeState":
        return LatticeState(np.asarray(values).reshape(self.n, self.components), self.dx, self.boundary)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[LatticeState]
    step_operator: np.ndarray | None = None

    @property
    def final(self) -> LatticeState:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.array([s.norm() for s in self.states])


def spectral_norm(h: np.ndarray) -> float:
    return float(np.linalg.norm(h, 2))


def check_stability(h: np.ndarray, dt: float, hbar: float = 1.0) -> float:
    """Raise StabilityError unless dt ||H|| / hbar < 0.5; returns the product."""
    norm = spectral_norm(h)
    product = dt * norm / hbar
    if product >= STABILITY_LIMIT:
        suggested = 0.9 * STABILITY_LIMIT * hbar / norm
        raise StabilityError(
            f"time step too large: dt*||H||/hbar={product:.3f} >= {STABILITY_LIMIT}; try dt <= {suggested:.4g}",
            suggested_dt=suggested,
        )
    return product


def static_step(h: np.ndarray, dt: float, hbar: float = 1.0) -> np.ndarray:
    return expm(-1j * dt / hbar * np.asarray(h))


def time_ordered_evolve(
    h: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    t0: float,
    t1: float,
    steps: int,
    hbar: float = 1.0,
    herm_tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint-rule product of exp(-(i/hbar) H(t + dt/2) dt); returns (psi(t1), U(t1, t0))."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    psi0 = np.asarray(psi0, dtype=complex)
    dt = (t1 - t0) / steps
    u = np.eye(psi0.shape[0], dtype=complex)
    for j in range(steps):
        hm = require_hermitian(np.asarray(h(t0 + (j + 0.5) * dt)), tol=herm_tol)
        u = expm(-1j / hbar * dt * hm) @ u
    residual = unitarity_residual(u)
    if residual > 1e-8:
        logger.warning(f"propagator drifted from unitarity residual={residual:.2e} steps={steps}")
    return u @ psi0, u


def evolve_static(
    h: np.ndarray,
    state: LatticeState,
    dt: float,
    steps: int,
    hbar: float = 1.0,
    record_every: int = 1,
) -> Trajectory:
    """Repeated application of one exact step exp(-i H dt / hbar) for a time-independent H."""
    check_stability(h, dt, hbar)
    step = static_step(h, dt, hbar)
    psi = state.flat()
    times = [0.0]
    states = [state]
    for j in range(1, steps + 1):
        psi = step @ psi
        if j % record_every == 0 or j == steps:
            times.append(j * dt)
            states.append(state.with_flat(psi))
    return Trajectory(times=np.asarray(times), states=states, step_operator=step)
