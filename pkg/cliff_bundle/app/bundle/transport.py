"""Evolution transports along a path, their connection, and the
connection <-> bundle Hamiltonian correspondence.

A transport is U(t, s) = l^-1_{gamma(t)} o U_hilbert(t, s) o l_{gamma(s)}.
It is stored as cumulative Hilbert-space factors on the path samples, so
U(t, s) = A(t) A(s)^-1 with A(t) = U(t, t0); identity and cocycle laws hold
by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from app.algebra.gamma_repr import MatrixRep, dual_gammas
from app.bundle.trivializations import Trivialization, conjugate_operator
from app.core.errors import DegenerateStepError, SampleCountError
from app.core.linalg import expm, require_hermitian
from app.core.logger import logger


Propagator = Callable[[float, float], np.ndarray]
Hamiltonian = Callable[[float], np.ndarray]

# eps * |d^2 U / dt^2| above this makes the central difference for Gamma unreliable
COARSE_STEP_TOL = 1e-2


@dataclass(frozen=True)
class PathSpec:
    gamma: Callable[[float], np.ndarray | float]
    t0: float
    t1: float
    samples: int

    def __post_init__(self) -> None:
        if self.samples < 2:
            raise SampleCountError(f"path needs >= 2 samples, got {self.samples}")
        if not self.t1 > self.t0:
            raise DegenerateStepError(f"path domain [{self.t0}, {self.t1}] is degenerate")

    @cached_property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.samples)

    @property
    def spacing(self) -> float:
        return (self.t1 - self.t0) / (self.samples - 1)

    def point(self, t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.gamma(t), dtype=float))


def straight_path(t0: float, t1: float, samples: int) -> PathSpec:
    """The world-line x(t) = t in a one-dimensional chart."""
    return PathSpec(lambda t: np.array([t]), t0, t1, samples)


@dataclass(frozen=True, eq=False)
class TransportOperator:
    path: PathSpec
    hilbert_u: Propagator
    trivialization: Trivialization
    cumulative: np.ndarray  # W_i = U_hilbert(t_i, t_0)

    def _anchor(self, t: float) -> int:
        times = self.path.times
        k = int(np.searchsorted(times, t, side="right")) - 1
        return min(max(k, 0), times.size - 1)

    def frame(self, t: float) -> np.ndarray:
        """A(t) = U_gamma(t, t0)."""
        times = self.path.times
        k = self._anchor(t)
        l0, _ = self.trivialization.matrices(self.path.point(times[0]))
        _, lt_inv = self.trivialization.matrices(self.path.point(t))
        step = self.hilbert_u(t, times[k]) if t != times[k] else np.eye(self.cumulative.shape[1])
        return lt_inv @ step @ self.cumulative[k] @ l0

    def __call__(self, t: float, s: float) -> np.ndarray:
        return self.frame(t) @ np.linalg.inv(self.frame(s))

    @property
    def dim(self) -> int:
        return int(self.cumulative.shape[1])

    def identity_residual(self, t: float) -> float:
        return float(np.max(np.abs(self(t, t) - np.eye(self.dim))))

    def cocycle_residual(self, t: float, s: float, r: float) -> float:
        return float(np.max(np.abs(self(t, s) @ self(s, r) - self(t, r))))


def evolution_transport(hilbert_u: Propagator, l: Trivialization, path: PathSpec) -> TransportOperator:
    times = path.times
    start = np.asarray(hilbert_u(times[0], times[0]))
    d = start.shape[0]
    if np.max(np.abs(start - np.eye(d))) > 1e-10:
        raise ValueError("hilbert propagator must satisfy U(s, s) = 1")
    if d != l.dim:
        raise ValueError(f"propagator acts on dimension {d}, trivialization on {l.dim}")
    cumulative = np.empty((times.size, d, d), dtype=complex)
    cumulative[0] = np.eye(d)
    for i in range(1, times.size):
        cumulative[i] = np.asarray(hilbert_u(times[i], times[i - 1])) @ cumulative[i - 1]
    logger.debug(f"transport built samples={times.size} dim={d} trivialization={l.name}")
    return TransportOperator(path=path, hilbert_u=hilbert_u, trivialization=l, cumulative=cumulative)


def midpoint_propagator(h: Hamiltonian, hbar: float = 1.0, max_step: float | None = None) -> Propagator:
    """Second-order U(t, s): product of exp(-(i/hbar) H(mid) dt) over sub-steps of at most max_step."""

    def u(t: float, s: float) -> np.ndarray:
        span = t - s
        n = 1 if max_step is None else max(1, math.ceil(abs(span) / max_step - 1e-9))
        dt = span / n
        d = np.asarray(h(s)).shape[0]
        out = np.eye(d, dtype=complex)
        if span == 0.0:
            return out
        for j in range(n):
            hm = require_hermitian(np.asarray(h(s + (j + 0.5) * dt)))
            out = expm(-1j / hbar * dt * hm) @ out
        return out

    return u


def frozen_propagator(h: Hamiltonian, hbar: float = 1.0) -> Propagator:
    """First-order U(t, s) = exp(-(i/hbar)(t - s) H(s))."""

    def u(t: float, s: float) -> np.ndarray:
        hs = require_hermitian(np.asarray(h(s)))
        return expm(-1j / hbar * (t - s) * hs)

    return u


def transport_from_hamiltonian(
    h: Hamiltonian,
    path: PathSpec,
    l: Trivialization,
    hbar: float = 1.0,
    max_step: float | None = None,
) -> TransportOperator:
    return evolution_transport(midpoint_propagator(h, hbar, max_step or path.spacing), l, path)


def bundle_hamiltonian(l: Trivialization, path: PathSpec, h: Hamiltonian) -> Hamiltonian:
    """H_gamma(t) = l^-1_{gamma(t)} H(t) l_{gamma(t)}."""
    return lambda t: conjugate_operator(l, path.point(t), np.asarray(h(t)))


def _check_eps(eps: float, what: str = "step") -> None:
    if not eps > 0.0 or not np.isfinite(eps):
        raise DegenerateStepError(f"{what} must be positive and finite, got {eps}")


def connection_from_transport(u: TransportOperator, s: float, eps: float | None = None) -> np.ndarray:
    """Gamma(s) = d/dt U(s, t) at t = s by central differences."""
    eps = eps if eps is not None else 1e-4 * (u.path.t1 - u.path.t0)
    _check_eps(eps)
    ahead, behind = u(s, s + eps), u(s, s - eps)
    curvature = float(np.linalg.norm(ahead - 2.0 * u(s, s) + behind, 2)) / eps**2
    if eps * curvature > COARSE_STEP_TOL:
        logger.warning(
            f"connection step eps={eps:.2e} is coarse for the transport at s={s:.4g}: "
            f"eps*|U''|={eps * curvature:.2e} > {COARSE_STEP_TOL:.0e}; try eps <= {COARSE_STEP_TOL / curvature:.2e}"
        )
    return (ahead - behind) / (2.0 * eps)


def connection_from_transport_reverse(u: TransportOperator, s: float, eps: float | None = None) -> np.ndarray:
    """-d/dt U(t, s) at t = s; agrees with connection_from_transport to O(eps^2)."""
    eps = eps if eps is not None else 1e-4 * (u.path.t1 - u.path.t0)
    _check_eps(eps)
    return -(u(s + eps, s) - u(s - eps, s)) / (2.0 * eps)


def connection_from_hamiltonian(h_path: Hamiltonian, hbar: float = 1.0) -> Hamiltonian:
    return lambda t: (1j / hbar) * np.asarray(h_path(t))


def hamiltonian_from_connection(gamma_path: Hamiltonian, hbar: float = 1.0) -> Hamiltonian:
    return lambda t: -1j * hbar * np.asarray(gamma_path(t))


def hamiltonian_from_transport(
    u: TransportOperator,
    t: float,
    hbar: float = 1.0,
    eps: float | None = None,
    t0: float | None = None,
) -> np.ndarray:
    """H_gamma(t) = i hbar (d/dt U(t, t0)) U(t0, t)."""
    eps = eps if eps is not None else u.path.spacing
    _check_eps(eps)
    t0 = u.path.t0 if t0 is None else t0
    derivative = (u(t + eps, t0) - u(t - eps, t0)) / (2.0 * eps)
    return 1j * hbar * derivative @ u(t0, t)


@dataclass(frozen=True, eq=False)
class SectionAlongPath:
    path: PathSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.shape[0] != self.path.samples:
            raise SampleCountError(f"section has {values.shape[0]} values, path has {self.path.samples} samples")
        object.__setattr__(self, "values", values)

    @cached_property
    def _splines(self) -> tuple[CubicSpline, CubicSpline]:
        t = self.path.times
        return CubicSpline(t, self.values.real, axis=0), CubicSpline(t, self.values.imag, axis=0)

    def __call__(self, t: float) -> np.ndarray:
        re, im = self._splines
        return re(t) + 1j * im(t)

    def derivative(self, t: float) -> np.ndarray:
        re, im = self._splines
        return re(t, 1) + 1j * im(t, 1)

    @classmethod
    def from_function(cls, path: PathSpec, func: Callable[[float], np.ndarray]) -> "SectionAlongPath":
        return cls(path, np.stack([np.asarray(func(t)) for t in path.times]))

    @classmethod
    def lifted(cls, path: PathSpec, l: Trivialization, psi: Sequence[np.ndarray]) -> "SectionAlongPath":
        """Psi_gamma(t_i) = l^-1_{gamma(t_i)} psi(t_i)."""
        values = [l.matrices(path.point(t))[1] @ np.asarray(p) for t, p in zip(path.times, psi)]
        return cls(path, np.stack(values))


def _check_derivation_step(section: SectionAlongPath, s: float, eps: float) -> None:
    _check_eps(eps, "derivation step")
    if eps > section.path.spacing * (1.0 + 1e-9):
        raise DegenerateStepError(f"eps={eps:.3e} exceeds the sample spacing {section.path.spacing:.3e}")
    if not section.path.t0 <= s <= section.path.t1 - eps:
        raise ValueError(f"s={s} with eps={eps} leaves the path domain")


def path_derivation(section: SectionAlongPath, u: TransportOperator, s: float, eps: float) -> np.ndarray:
    """D_s(lambda) ~ [U(s, s + eps) lambda(s + eps) - lambda(s)] / eps."""
    _check_derivation_step(section, s, eps)
    return (u(s, s + eps) @ section(s + eps) - section(s)) / eps


def path_derivation_local(section: SectionAlongPath, u: TransportOperator, s: float, eps: float) -> np.ndarray:
    """Local form d lambda/ds + Gamma(s) lambda(s)."""
    _check_derivation_step(section, s, eps)
    return section.derivative(s) + connection_from_transport(u, s, eps) @ section(s)


def bundle_gammas(rep: MatrixRep, l: Trivialization, x: np.ndarray | float, upper: bool = True) -> MatrixRep:
    """G^mu = l_x^-1 gamma^mu l_x (or the lower-index set)."""
    source = dual_gammas(rep) if upper else rep
    conjugated = np.stack([conjugate_operator(l, x, g) for g in source.gammas])
    return MatrixRep(conjugated, source.metric, convention=f"{rep.convention}:bundle")


def bundle_derivative(l: Trivialization, coords: Sequence[float], derivative: np.ndarray) -> np.ndarray:
    """Lattice form of l^-1 d (l .): L^-1 (D kron 1) L for a site-derivative matrix D."""
    l_block, l_inv_block = l.block([np.atleast_1d(c) for c in coords])
    return l_inv_block @ np.kron(derivative, np.eye(l.dim)) @ l_block


def bundle_momentum(
    rep: MatrixRep,
    l: Trivialization,
    coords: Sequence[float],
    derivative: np.ndarray,
    axis: int = 1,
    hbar: float = 1.0,
) -> np.ndarray:
    """Bundle geometric momentum -i hbar G^axis d_axis on a lattice, site-major ordering."""
    l_block, l_inv_block = l.block([np.atleast_1d(c) for c in coords])
    g_upper = dual_gammas(rep).gammas[axis]
    g_block = l_inv_block @ np.kron(np.eye(len(coords)), g_upper) @ l_block
    return -1j * hbar * g_block @ bundle_derivative(l, coords, derivative)
