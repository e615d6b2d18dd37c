"""Vierbeins, Christoffel symbols, spin connections and spinor transport on a chart.

Index conventions: e[a, mu] = e^a_mu, E[a, mu] = E_a^mu (inverse frame),
christoffel[alpha, mu, nu] = Gamma^alpha_{mu nu}, spin_omega[a, b, mu] = omega_{ab mu}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from app.algebra.gamma_repr import MatrixRep, gammas_for_metric
from app.core.errors import SampleCountError, SignatureError, SingularMetricError
from app.core.linalg import central_derivative, comm, richardson
from app.core.logger import logger
from app.geometry.metrics import ChartMetric


Curve = Callable[[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class Vierbein:
    e: np.ndarray
    eta: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        return inverse_vierbein(self)

    def metric(self) -> np.ndarray:
        return self.e.T @ np.diag(self.eta) @ self.e

    def residual(self, g: np.ndarray) -> float:
        return float(np.max(np.abs(self.metric() - g)))


def _assign_slots(w: np.ndarray, v: np.ndarray, eta: np.ndarray) -> list[int]:
    used: set[int] = set()
    order = []
    for a, sign in enumerate(eta):
        candidates = [i for i in range(w.size) if i not in used and np.sign(w[i]) == sign]
        if not candidates:
            raise SignatureError(f"eigenvalues {w.tolist()} do not match frame signature {eta.tolist()}")
        best = max(candidates, key=lambda i: (abs(v[a, i]), -i))
        used.add(best)
        order.append(best)
    return order


def vierbein_at(metric: ChartMetric, x: np.ndarray) -> Vierbein:
    """Frame e with e^T eta e = g(x).

    Gauge: each frame slot takes the eigenvector of g whose eigenvalue sign
    matches eta there and which best aligns with coordinate axis a; rows are
    scaled by sqrt(|lambda|) with e[a, a] >= 0. Diagonal metrics give
    diag(sqrt|g_aa|).
    """
    g = metric.at(x)
    n = metric.n
    if np.count_nonzero(g - np.diag(np.diag(g))) == 0:
        w, v = np.diag(g).copy(), np.eye(n)
    else:
        w, v = np.linalg.eigh(g)
    order = _assign_slots(w, v, metric.eta)
    e = np.empty((n, n))
    for a, i in enumerate(order):
        row = np.sqrt(abs(w[i])) * v[:, i]
        pivot = row[a] if row[a] != 0.0 else row[np.flatnonzero(row)[0]]
        e[a] = row if pivot >= 0.0 else -row
    return Vierbein(e=e, eta=metric.eta.copy())


def inverse_vierbein(v: Vierbein) -> np.ndarray:
    """E[a, mu] = E_a^mu with e^a_mu E_b^mu = delta^a_b."""
    return np.linalg.inv(v.e).T


def christoffel_from_derivatives(g_inv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Levi-Civita symbols from g^{-1} (..., n, n) and dg (..., n, n, n), symmetrized in the lower pair."""
    # term[s, m, n] = d_m g_sn + d_n g_sm - d_s g_mn
    term = np.einsum("...msn->...smn", dg) + np.einsum("...nsm->...smn", dg) - dg
    gamma = 0.5 * np.einsum("...as,...smn->...amn", g_inv, term)
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def christoffel_at(metric: ChartMetric, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = metric.at(x)
    cond = np.linalg.cond(g)
    if cond > 1e12:
        raise SingularMetricError(f"metric singular at x={x.tolist()}: cond={cond:.3e}")
    return christoffel_from_derivatives(np.linalg.inv(g), metric.derivative(x, h))


def metric_compatibility_residual(metric: ChartMetric, x: np.ndarray, h: float = 1e-4) -> float:
    """max |nabla_alpha g_{mu nu}| using the same derivative data as the connection."""
    x = np.asarray(x, dtype=float)
    g = metric.at(x)
    dg = metric.derivative(x, h)
    gamma = christoffel_from_derivatives(np.linalg.inv(g), dg)
    nabla = dg - np.einsum("sam,sn->amn", gamma, g) - np.einsum("san,ms->amn", gamma, g)
    return float(np.max(np.abs(nabla)))


@lru_cache(maxsize=16)
def _frame_rep(eta: tuple[float, ...]) -> MatrixRep:
    return gammas_for_metric(np.array(eta))


def frame_rep_for(metric: ChartMetric) -> MatrixRep:
    return _frame_rep(tuple(float(s) for s in metric.eta))


@dataclass(frozen=True, eq=False)
class ConnectionData:
    christoffel: np.ndarray
    spin_omega: np.ndarray
    omega: np.ndarray
    vierbein: Vierbein
    rep: MatrixRep

    @property
    def omega_mixed(self) -> np.ndarray:
        """omega^a_{b mu} (first index raised with eta)."""
        return self.vierbein.eta[:, None, None] * self.spin_omega

    def omega_quarter_form(self) -> np.ndarray:
        """(1/4) omega_{ab mu} gamma^a gamma^b, equal to the commutator form for antisymmetric omega."""
        upper = np.einsum("ab,bij->aij", np.diag(self.vierbein.eta), self.rep.gammas)
        return 0.25 * np.einsum("abm,aij,bjk->mik", self.spin_omega, upper, upper)


def spin_connection_at(
    metric: ChartMetric,
    x: np.ndarray,
    h: float = 1e-4,
    rep: MatrixRep | None = None,
) -> ConnectionData:
    """omega_{ab mu} and Omega_mu = (1/8) omega_{ab mu} [gamma^a, gamma^b] at x.

    omega^a_{b mu} = e^a_nu (d_mu E_b^nu + Gamma^nu_{mu s} E_b^s), lowered with
    eta and stored antisymmetrized. The spinor covariant derivative is
    d_mu psi + Omega_mu psi.
    """
    x = np.asarray(x, dtype=float)
    rep = rep or frame_rep_for(metric)
    vb = vierbein_at(metric, x)
    e = vb.e
    big_e = vb.inverse
    d_big_e = central_derivative(lambda y: inverse_vierbein(vierbein_at(metric, y)), x, h, order=4)
    gamma = christoffel_at(metric, x, h)

    mixed = np.einsum("an,mbn->abm", e, d_big_e) + np.einsum("an,nms,bs->abm", e, gamma, big_e)
    lowered = metric.eta[:, None, None] * mixed
    spin_omega = 0.5 * (lowered - np.swapaxes(lowered, 0, 1))

    upper = np.einsum("ab,bij->aij", np.diag(metric.eta), rep.gammas)
    k = rep.size
    omega = np.zeros((metric.n, k, k), dtype=complex)
    for a in range(metric.n):
        for b in range(metric.n):
            if a != b:
                omega += 0.125 * spin_omega[a, b][:, None, None] * comm(upper[a], upper[b])[None]
    return ConnectionData(christoffel=gamma, spin_omega=spin_omega, omega=omega, vierbein=vb, rep=rep)


def frame_gammas(metric: ChartMetric, x: np.ndarray, rep: MatrixRep | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate gammas at x: (gamma_mu = e^a_mu gamma_a, gamma^mu = E_a^mu gamma^a)."""
    rep = rep or frame_rep_for(metric)
    vb = vierbein_at(metric, x)
    upper_frame = np.einsum("ab,bij->aij", np.diag(metric.eta), rep.gammas)
    lower = np.einsum("am,aij->mij", vb.e, rep.gammas)
    upper = np.einsum("am,aij->mij", vb.inverse, upper_frame)
    return lower, upper


def dual_frame_derivative_check(metric: ChartMetric, x: np.ndarray, h: float = 1e-4) -> tuple[float, float]:
    """Residuals of d_mu gamma_nu = Gamma^a_{mu nu} gamma_a and d_mu gamma^nu = -Gamma^nu_{mu a} gamma^a.

    The frame gammas are fixed matrices, so the coordinate derivative is taken
    together with the spinor frame rotation [Omega_mu, .].
    """
    x = np.asarray(x, dtype=float)
    rep = frame_rep_for(metric)
    conn = spin_connection_at(metric, x, h, rep)
    lower, upper = frame_gammas(metric, x, rep)
    d_lower = central_derivative(lambda y: frame_gammas(metric, y, rep)[0], x, h, order=4)
    d_upper = central_derivative(lambda y: frame_gammas(metric, y, rep)[1], x, h, order=4)
    gamma = conn.christoffel

    rot_lower = np.einsum("mij,njk->mnik", conn.omega, lower) - np.einsum("nij,mjk->mnik", lower, conn.omega)
    rot_upper = np.einsum("mij,njk->mnik", conn.omega, upper) - np.einsum("nij,mjk->mnik", upper, conn.omega)
    lhs_lower = d_lower + rot_lower
    rhs_lower = np.einsum("amn,aij->mnij", gamma, lower)
    lhs_upper = d_upper + rot_upper
    rhs_upper = -np.einsum("nma,aij->mnij", gamma, upper)
    return float(np.max(np.abs(lhs_lower - rhs_lower))), float(np.max(np.abs(lhs_upper - rhs_upper)))


def spin_curvature_at(metric: ChartMetric, x: np.ndarray, h: float = 1e-3, inner_h: float = 1e-4) -> np.ndarray:
    """R^a_{b mu nu} of the spin connection by Richardson-extrapolated central differences."""
    x = np.asarray(x, dtype=float)

    def mixed(y: np.ndarray) -> np.ndarray:
        return spin_connection_at(metric, y, inner_h).omega_mixed

    coarse = central_derivative(mixed, x, h, order=2)
    fine = central_derivative(mixed, x, h / 2.0, order=2)
    d_omega = richardson(coarse, fine, order=2)
    w = mixed(x)
    curvature = (
        np.einsum("mabn->abmn", d_omega)
        - np.einsum("nabm->abmn", d_omega)
        + np.einsum("acm,cbn->abmn", w, w)
        - np.einsum("acn,cbm->abmn", w, w)
    )
    return curvature


def _velocity(curve: Curve, t: float, span: float) -> np.ndarray:
    delta = 1e-4 * max(span, 1e-12)
    return (
        -np.asarray(curve(t + 2 * delta)) + 8.0 * np.asarray(curve(t + delta))
        - 8.0 * np.asarray(curve(t - delta)) + np.asarray(curve(t - 2 * delta))
    ) / (12.0 * delta)


def covariant_derivative_spinor(
    psi: np.ndarray,
    curve: np.ndarray,
    metric: ChartMetric,
    dt: float,
    h: float = 1e-4,
) -> np.ndarray:
    """nabla_t psi = d psi/dt + Omega_mu (dx^mu/dt) psi on uniformly spaced samples."""
    psi = np.asarray(psi)
    curve = np.asarray(curve, dtype=float)
    if psi.shape[0] < 3 or curve.shape[0] < 3:
        raise SampleCountError(f"need at least 3 samples, got {psi.shape[0]}")
    if psi.shape[0] != curve.shape[0]:
        raise SampleCountError(f"spinor has {psi.shape[0]} samples, curve has {curve.shape[0]}")
    d_psi = np.gradient(psi, dt, axis=0, edge_order=2)
    x_dot = np.gradient(curve, dt, axis=0, edge_order=2)
    rep = frame_rep_for(metric)
    out = np.empty_like(d_psi, dtype=complex)
    for i in range(psi.shape[0]):
        omega = spin_connection_at(metric, curve[i], h, rep).omega
        out[i] = d_psi[i] + np.einsum("m,mij,j->i", x_dot[i], omega, psi[i])
    return out


def _transport_generator(metric: ChartMetric, curve: Curve, t: float, span: float, rep: MatrixRep) -> np.ndarray:
    x = np.asarray(curve(t), dtype=float)
    omega = spin_connection_at(metric, x, rep=rep).omega
    return -np.einsum("m,mij->ij", _velocity(curve, t, span), omega)


def parallel_transport_spinor(
    metric: ChartMetric,
    curve: Curve,
    t0: float,
    t1: float,
    psi0: np.ndarray,
    steps: int = 400,
) -> np.ndarray:
    """RK4 solution of d psi/dt = -Omega_mu x'^mu psi; returns all steps + 1 samples."""
    if steps < 1:
        raise SampleCountError(f"steps must be >= 1, got {steps}")
    rep = frame_rep_for(metric)
    psi0 = np.asarray(psi0, dtype=complex)
    span = abs(t1 - t0)
    dt = (t1 - t0) / steps
    out = np.empty((steps + 1,) + psi0.shape, dtype=complex)
    out[0] = psi0
    psi = psi0
    for i in range(steps):
        t = t0 + i * dt
        a_start = _transport_generator(metric, curve, t, span, rep)
        a_mid = _transport_generator(metric, curve, t + 0.5 * dt, span, rep)
        a_end = _transport_generator(metric, curve, t + dt, span, rep)
        k1 = a_start @ psi
        k2 = a_mid @ (psi + 0.5 * dt * k1)
        k3 = a_mid @ (psi + 0.5 * dt * k2)
        k4 = a_end @ (psi + dt * k3)
        psi = psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = psi
    return out


def spinor_holonomy(metric: ChartMetric, loop: Curve, steps: int = 400) -> np.ndarray:
    """Transport of the identity around loop(t), t in [0, 1]."""
    rep = frame_rep_for(metric)
    start = np.asarray(loop(0.0), dtype=float)
    end = np.asarray(loop(1.0), dtype=float)
    if np.max(np.abs(metric.separation(start, end))) > 1e-9 * max(1.0, float(np.max(np.abs(start)))):
        logger.warning(f"holonomy loop is not closed: start={start.tolist()} end={end.tolist()}")
    return parallel_transport_spinor(metric, loop, 0.0, 1.0, np.eye(rep.size, dtype=complex), steps)[-1]
