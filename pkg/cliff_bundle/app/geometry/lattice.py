"""Regular chart lattices: fields with ghost layers, the curved Dirac operator,
the d'Alembert factorization check and the geometric derivative of vector fields."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from app.algebra.gamma_repr import MatrixRep
from app.core import storage
from app.core.errors import GhostDataError, SingularMetricError
from app.core.logger import logger
from app.core.models import thread_cap
from app.geometry.frames import christoffel_from_derivatives, frame_gammas, frame_rep_for, spin_connection_at
from app.geometry.metrics import ChartMetric


MIN_GHOST = 2


@dataclass(frozen=True, eq=False)
class LatticeField:
    """Values on a regular grid, ghost layers included.

    data has shape grid_shape + component_shape. Grid index i along axis mu
    sits at origin[mu] + i * spacing[mu].
    """

    data: np.ndarray
    spacing: tuple[float, ...]
    origin: tuple[float, ...]
    ghost: int = MIN_GHOST

    @property
    def ndim(self) -> int:
        return len(self.spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape[: self.ndim])

    @property
    def component_shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape[self.ndim:])

    def coordinates(self, idx: Sequence[int]) -> np.ndarray:
        return np.asarray(self.origin) + np.asarray(idx, dtype=float) * np.asarray(self.spacing)

    def points(self) -> np.ndarray:
        axes = [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def interior(self) -> tuple[slice, ...]:
        return tuple(slice(self.ghost, n - self.ghost) for n in self.shape)

    def interior_indices(self) -> list[tuple[int, ...]]:
        return list(product(*(range(self.ghost, n - self.ghost) for n in self.shape)))

    def require_ghost(self, idx: Sequence[int], width: int = 1) -> None:
        if self.ghost < MIN_GHOST:
            raise GhostDataError(f"field has {self.ghost} ghost layers, need >= {MIN_GHOST}")
        for axis, (i, n) in enumerate(zip(idx, self.shape)):
            if i - width < 0 or i + width >= n or i < self.ghost or i >= n - self.ghost:
                raise GhostDataError(f"index {tuple(idx)} has no ghost data along axis {axis} (size {n})")

    @classmethod
    def for_box(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        lo: Sequence[float],
        hi: Sequence[float],
        n: Sequence[int],
        ghost: int = MIN_GHOST,
        vectorized: bool = False,
    ) -> "LatticeField":
        """Sample func on n[mu] interior points per axis with spacing (hi - lo) / n plus ghost layers."""
        spacing = tuple((b - a) / m for a, b, m in zip(lo, hi, n))
        origin = tuple(a - ghost * h for a, h in zip(lo, spacing))
        shape = tuple(m + 2 * ghost for m in n)
        axes = [o + h * np.arange(m) for o, h, m in zip(origin, spacing, shape)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        if vectorized:
            data = np.asarray(func(pts))
        else:
            flat = pts.reshape(-1, len(n))
            values = [np.asarray(func(p)) for p in flat]
            data = np.stack(values).reshape(shape + values[0].shape)
        return cls(data=data, spacing=spacing, origin=origin, ghost=ghost)

    def save(self, path: Path | str, extra: dict | None = None) -> tuple[Path, Path]:
        info = {"ghost": self.ghost}
        info.update(extra or {})
        return storage.write_field(path, self.data, self.spacing, self.origin, info)

    @classmethod
    def load(cls, path: Path | str) -> "LatticeField":
        data, header = storage.read_field(path)
        return cls(
            data=data,
            spacing=tuple(header["spacing"]),
            origin=tuple(header["origin"]),
            ghost=int(header.get("ghost", MIN_GHOST)),
        )


def _shifted(field: LatticeField, idx: Sequence[int], axis: int, step: int) -> np.ndarray:
    moved = list(idx)
    moved[axis] += step
    return field.data[tuple(moved)]


def curved_dirac_apply(
    field: LatticeField,
    metric: ChartMetric,
    idx: Sequence[int],
    rep: MatrixRep | None = None,
    h: float = 1e-4,
) -> np.ndarray:
    """D psi = gamma^a E_a^mu (d_mu psi + Omega_mu psi) at one lattice index.

    d_mu is the second-order central difference; the connection term is the
    frame-index reading of the cubic-gamma term, gamma^mu Omega_mu.
    """
    field.require_ghost(idx)
    rep = rep or frame_rep_for(metric)
    x = field.coordinates(idx)
    conn = spin_connection_at(metric, x, h, rep)
    _, upper = frame_gammas(metric, x, rep)
    psi = field.data[tuple(idx)]
    out = np.zeros(rep.size, dtype=complex)
    for mu in range(field.ndim):
        d_psi = (_shifted(field, idx, mu, 1) - _shifted(field, idx, mu, -1)) / (2.0 * field.spacing[mu])
        out += upper[mu] @ (d_psi + conn.omega[mu] @ psi)
    return out


def curved_dirac_field(
    field: LatticeField,
    metric: ChartMetric,
    rep: MatrixRep | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """curved_dirac_apply on every interior point; points are independent and run on a thread pool."""
    rep = rep or frame_rep_for(metric)
    indices = field.interior_indices()
    workers = workers or thread_cap()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(lambda idx: curved_dirac_apply(field, metric, idx, rep), indices))
    interior_shape = tuple(n - 2 * field.ghost for n in field.shape)
    return np.stack(values).reshape(interior_shape + (rep.size,))


def _interior_view(data: np.ndarray, ghost: int, shifts: Sequence[int]) -> np.ndarray:
    sl = []
    for axis, s in enumerate(shifts):
        n = data.shape[axis]
        sl.append(slice(ghost + s, n - ghost + s))
    return data[tuple(sl)]


def _first_derivatives(phi: LatticeField) -> np.ndarray:
    n = phi.ndim
    parts = []
    for mu in range(n):
        plus = [0] * n
        minus = [0] * n
        plus[mu], minus[mu] = 1, -1
        parts.append(
            (_interior_view(phi.data, phi.ghost, plus) - _interior_view(phi.data, phi.ghost, minus))
            / (2.0 * phi.spacing[mu])
        )
    return np.stack(parts, axis=-1)


def _second_derivatives(phi: LatticeField) -> np.ndarray:
    n = phi.ndim
    base = _interior_view(phi.data, phi.ghost, [0] * n)
    out = np.zeros(base.shape + (n, n), dtype=phi.data.dtype)
    for mu in range(n):
        for nu in range(mu, n):
            if mu == nu:
                s = [0] * n
                s[mu] = 1
                up = _interior_view(phi.data, phi.ghost, s)
                s[mu] = -1
                down = _interior_view(phi.data, phi.ghost, s)
                value = (up - 2.0 * base + down) / phi.spacing[mu] ** 2
            else:
                terms = []
                for sm, sn in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    s = [0] * n
                    s[mu], s[nu] = sm, sn
                    terms.append(sm * sn * _interior_view(phi.data, phi.ghost, s))
                value = sum(terms) / (4.0 * phi.spacing[mu] * phi.spacing[nu])
            out[..., mu, nu] = value
            out[..., nu, mu] = value
    return out


def _interior_points(phi: LatticeField) -> np.ndarray:
    return phi.points()[phi.interior()]


def _upper_gammas_field(metric: ChartMetric, points: np.ndarray, rep: MatrixRep) -> np.ndarray:
    flat = points.reshape(-1, metric.n)
    uppers = np.stack([frame_gammas(metric, p, rep)[1] for p in flat])
    return uppers.reshape(points.shape[:-1] + uppers.shape[1:])


def _laplace_beltrami(phi: LatticeField, metric: ChartMetric) -> np.ndarray:
    """(1/sqrt|g|) d_mu (sqrt|g| g^{mu nu} d_nu phi) in flux form with half-point fluxes."""
    n = phi.ndim
    pts = _interior_points(phi)
    spacing = np.asarray(phi.spacing)
    root = np.sqrt(np.abs(np.linalg.det(metric.field(pts))))
    total = np.zeros(pts.shape[:-1], dtype=phi.data.dtype)
    for mu in range(n):
        flux = []
        for side in (1, -1):
            half = pts.copy()
            half[..., mu] += 0.5 * side * spacing[mu]
            g_half = metric.field(half)
            g_inv = np.linalg.inv(g_half)
            root_half = np.sqrt(np.abs(np.linalg.det(g_half)))
            # phi derivatives at the half point x + side * h_mu / 2
            grad = []
            for nu in range(n):
                if nu == mu:
                    s_out = [0] * n
                    s_out[mu] = side
                    diff = _interior_view(phi.data, phi.ghost, s_out) - _interior_view(phi.data, phi.ghost, [0] * n)
                    grad.append(side * diff / spacing[mu])
                else:
                    s1, s2, s3, s4 = ([0] * n for _ in range(4))
                    s1[nu], s2[nu] = 1, -1
                    s3[mu], s3[nu] = side, 1
                    s4[mu], s4[nu] = side, -1
                    central_here = _interior_view(phi.data, phi.ghost, s1) - _interior_view(phi.data, phi.ghost, s2)
                    central_there = _interior_view(phi.data, phi.ghost, s3) - _interior_view(phi.data, phi.ghost, s4)
                    grad.append((central_here + central_there) / (4.0 * spacing[nu]))
            grad_arr = np.stack(grad, axis=-1)
            flux.append(root_half * np.einsum("...n,...n->...", g_inv[..., mu, :], grad_arr))
        total += (flux[0] - flux[1]) / spacing[mu]
    return total / root


def dalembert_factorization_check(
    phi: LatticeField,
    metric: ChartMetric,
    h: float = 1e-4,
    return_fields: bool = False,
) -> float | tuple[float, np.ndarray, np.ndarray]:
    """max |(1/k) tr(gamma^mu gamma^nu D_mu D_nu phi) - Laplace-Beltrami(phi)| over interior points."""
    if phi.ghost < MIN_GHOST:
        raise GhostDataError(f"scalar field has {phi.ghost} ghost layers, need >= {MIN_GHOST}")
    rep = frame_rep_for(metric)
    pts = _interior_points(phi)
    g = metric.field(pts)
    if np.any(np.abs(np.linalg.det(g)) < 1e-14):
        raise SingularMetricError("metric singular on the lattice")
    gamma = christoffel_from_derivatives(np.linalg.inv(g), metric.derivative_field(pts, h))
    d1 = _first_derivatives(phi)
    d2 = _second_derivatives(phi)
    hessian = d2 - np.einsum("...amn,...a->...mn", gamma, d1)
    upper = _upper_gammas_field(metric, pts, rep)
    contraction = np.einsum("...mij,...njk,...mn->...ik", upper, upper, hessian)
    lhs = np.trace(contraction, axis1=-2, axis2=-1) / rep.size
    rhs = _laplace_beltrami(phi, metric)
    residual = float(np.max(np.abs(lhs - rhs)))
    logger.debug(f"dalembert check shape={phi.shape} spacing={phi.spacing} residual={residual:.3e}")
    if return_fields:
        return residual, lhs, rhs
    return residual


def dalembert_discretization_error(
    phi: LatticeField,
    metric: ChartMetric,
    box_exact: Callable[[np.ndarray], np.ndarray],
    h: float = 1e-4,
) -> tuple[float, float, float]:
    """(agreement, factorized error, flux error): the two sides against each other and against an exact box phi.

    box_exact takes interior points of shape (..., n).
    """
    agreement, lhs, rhs = dalembert_factorization_check(phi, metric, h, return_fields=True)
    exact = np.asarray(box_exact(_interior_points(phi)))
    return agreement, float(np.max(np.abs(lhs - exact))), float(np.max(np.abs(rhs - exact)))


@dataclass
class GeometricDerivative:
    divergence: np.ndarray
    curl: np.ndarray


def vector_geometric_derivative(v: LatticeField, metric: ChartMetric, h: float = 1e-4) -> GeometricDerivative:
    """d v = gamma^mu gamma^nu D_mu v_nu for a covector field, split into grade 0 and grade 2.

    divergence = g^{mu nu} D_mu v_nu; curl[mu, nu] = d_mu v_nu - d_nu v_mu.
    """
    if v.component_shape != (v.ndim,):
        raise GhostDataError(f"vector field needs {v.ndim} components per site, got {v.component_shape}")
    if v.ghost < 1:
        raise GhostDataError("vector field needs ghost data")
    pts = _interior_points(v)
    g = metric.field(pts)
    g_inv = np.linalg.inv(g)
    gamma = christoffel_from_derivatives(g_inv, metric.derivative_field(pts, h))
    n = v.ndim
    grads = []
    for mu in range(n):
        plus = [0] * n
        minus = [0] * n
        plus[mu], minus[mu] = 1, -1
        grads.append(
            (_interior_view(v.data, v.ghost, plus) - _interior_view(v.data, v.ghost, minus)) / (2.0 * v.spacing[mu])
        )
    dv = np.stack(grads, axis=-2)  # [..., mu, nu] = d_mu v_nu
    vals = _interior_view(v.data, v.ghost, [0] * n)
    cov = dv - np.einsum("...amn,...a->...mn", gamma, vals)
    divergence = np.einsum("...mn,...mn->...", g_inv, cov)
    curl = dv - np.swapaxes(dv, -1, -2)
    return GeometricDerivative(divergence=divergence, curl=curl)
