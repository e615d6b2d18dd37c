"""Geometric operators on lattice states: the Clifford-valued momentum,
spin-vectors and the stress-energy contraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from app.algebra.gamma_repr import MatrixRep, dual_gammas
from app.bundle.trivializations import Trivialization, conjugate_operator
from app.core.errors import BoundaryError, DimensionMismatchError
from app.core.linalg import periodic_central_difference
from app.evolution.propagators import LatticeState
from app.geometry.frames import frame_gammas, frame_rep_for, spin_connection_at
from app.geometry.metrics import ChartMetric


def momentum_rep(rep: MatrixRep, metric: ChartMetric | None) -> MatrixRep:
    """The representation the momentum is built in: rep itself unless its signature disagrees with the chart."""
    if metric is None or np.allclose(np.diag(rep.metric), metric.eta):
        return rep
    return frame_rep_for(metric)


def momentum_operator(
    n: int,
    dx: float,
    rep: MatrixRep,
    metric: ChartMetric | None = None,
    boundary: str = "periodic",
    hbar: float = 1.0,
    time: float = 0.0,
) -> np.ndarray:
    """Spatial part of the geometric momentum, -i hbar gamma^1 (d_1 + Omega_1), site-major.

    Without a metric the lattice is flat and the operator is -i hbar (D kron gamma^1).
    With a 1+1 chart metric the frame gamma^1(x) and the spin connection
    Omega_1(x) are evaluated at (time, x_i).
    """
    if boundary != "periodic":
        raise BoundaryError(f"geometric momentum needs a periodic lattice, got {boundary!r}")
    if rep.n < 2:
        raise DimensionMismatchError("momentum needs at least one spatial gamma")
    d = periodic_central_difference(n, dx)
    if metric is None:
        return -1j * hbar * np.kron(d, dual_gammas(rep).gammas[1])
    if metric.n != 2:
        raise DimensionMismatchError(f"lattice momentum uses a 1+1 chart, got n={metric.n}")
    rep = momentum_rep(rep, metric)
    k = rep.size
    gammas_up = []
    omegas = []
    for i in range(n):
        x = np.array([time, i * dx])
        gammas_up.append(frame_gammas(metric, x, rep)[1][1])
        omegas.append(spin_connection_at(metric, x, rep=rep).omega[1])
    g_block = block_diag(*gammas_up)
    covariant = np.kron(d, np.eye(k)) + block_diag(*omegas)
    return -1j * hbar * g_block @ covariant


def dirac_metric_operator(n: int, rep: MatrixRep) -> np.ndarray:
    """1 kron gamma^0: the Gram matrix of the Dirac inner product (times dx)."""
    return np.kron(np.eye(n), rep.gammas[0])


def dirac_inner(phi: LatticeState, psi: LatticeState, rep: MatrixRep) -> complex:
    """<phi|psi>_D = sum phi^dagger gamma^0 psi dx."""
    return complex(np.einsum("ia,ab,ib->", phi.data.conj(), rep.gammas[0], psi.data) * psi.dx)


def dirac_hermiticity_residual(op: np.ndarray, rep: MatrixRep) -> float:
    n = op.shape[0] // rep.size
    weighted = dirac_metric_operator(n, rep) @ op
    return float(np.max(np.abs(weighted - weighted.conj().T)))


def expectation_momentum(state: LatticeState, op: np.ndarray, rep: MatrixRep) -> complex:
    """<psi|p psi>_D, unnormalized."""
    return dirac_inner(state, state.with_flat(op @ state.flat()), rep)


def momentum_density_expectation(state: LatticeState, hbar: float = 1.0) -> complex:
    """sum psi^dagger (-i hbar D psi) dx, the translation generator (coefficient of gamma^1)."""
    d = periodic_central_difference(state.n, state.dx)
    return complex(np.vdot(state.data, -1j * hbar * (d @ state.data)) * state.dx)


@dataclass(frozen=True, eq=False)
class SpinVector:
    """Components (H gamma^0, P_j gamma^j) on state space kron spinor space, plus their sum."""

    components: tuple[np.ndarray, ...]
    rep: MatrixRep

    @property
    def energy(self) -> np.ndarray:
        return self.components[0]

    @property
    def aggregate(self) -> np.ndarray:
        return np.sum(self.components, axis=0)

    def conjugated(self, l: np.ndarray) -> "SpinVector":
        """Conjugate by l acting on the state factor: (l kron 1)^-1 X (l kron 1)."""
        big = np.kron(l, np.eye(self.rep.size))
        big_inv = np.linalg.inv(big)
        return SpinVector(tuple(big_inv @ c @ big for c in self.components), self.rep)


def spin_vector_assemble(h: np.ndarray, p: Sequence[np.ndarray], rep: MatrixRep) -> SpinVector:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatchError(f"H must be square, got shape {h.shape}")
    if len(p) != rep.n - 1:
        raise DimensionMismatchError(f"need {rep.n - 1} spatial momenta, got {len(p)}")
    for j, pj in enumerate(p):
        if np.shape(pj) != h.shape:
            raise DimensionMismatchError(f"P_{j + 1} has shape {np.shape(pj)}, H has {h.shape}")
    upper = dual_gammas(rep).gammas
    components = [np.kron(h, upper[0])] + [np.kron(np.asarray(pj), upper[j + 1]) for j, pj in enumerate(p)]
    return SpinVector(tuple(components), rep)


def stress_energy_contract(t: np.ndarray, rep: MatrixRep) -> np.ndarray:
    """sum_{mu nu} T^{mu nu} gamma_mu gamma_nu."""
    t = np.asarray(t)
    if t.shape != (rep.n, rep.n):
        raise DimensionMismatchError(f"T has shape {t.shape}, representation has n={rep.n}")
    if np.iscomplexobj(t) and np.max(np.abs(t.imag)) > 0.0:
        raise ValueError("stress-energy values must be real")
    return np.einsum("mn,mij,njk->ik", t.real, rep.gammas, rep.gammas)


def scalar_stress_energy(grad_phi: np.ndarray, phi: float, m: float, g: np.ndarray) -> np.ndarray:
    """T^{mu nu} = d^mu phi d^nu phi - g^{mu nu} L with L = (d phi . d phi - m^2 phi^2) / 2."""
    grad_phi = np.asarray(grad_phi, dtype=float)
    g_inv = np.linalg.inv(np.asarray(g, dtype=float))
    raised = g_inv @ grad_phi
    lagrangian = 0.5 * (grad_phi @ raised - m**2 * phi**2)
    return np.outer(raised, raised) - g_inv * lagrangian


def bundle_stress_energy(t: np.ndarray, rep: MatrixRep, l: Trivialization, x: np.ndarray | float) -> np.ndarray:
    """G_mu T^{mu nu} G_nu = l^-1 (T^{mu nu} gamma_mu gamma_nu) l."""
    return conjugate_operator(l, x, stress_energy_contract(t, rep))
