"""Small dense linear-algebra and finite-difference helpers shared by all modules."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm as _scipy_expm

from app.core.errors import NonHermitianError


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring with Pade approximants)."""
    return _scipy_expm(np.asarray(a))


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a), ord="fro"))


def anticomm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_residual(h: np.ndarray) -> float:
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def require_hermitian(h: np.ndarray, tol: float = 1e-10, what: str = "hamiltonian") -> np.ndarray:
    residual = hermiticity_residual(h)
    if residual > tol:
        raise NonHermitianError(f"{what} is not hermitian: residual={residual:.3e} tol={tol:.1e}")
    return np.asarray(h)


def unitarity_residual(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def central_derivative(
    f: Callable[[np.ndarray], np.ndarray],
    x: Sequence[float] | np.ndarray,
    h: float,
    order: int = 4,
) -> np.ndarray:
    """Partial derivatives of an array-valued function of a point.

    Returns an array of shape (n,) + f(x).shape, entry [alpha] = d f / d x^alpha.
    """
    x = np.asarray(x, dtype=float)
    base = np.asarray(f(x))
    out = np.zeros((x.size,) + base.shape, dtype=np.result_type(base, float))
    for alpha in range(x.size):
        e = np.zeros_like(x)
        e[alpha] = h
        if order == 2:
            out[alpha] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h)
        else:
            out[alpha] = (
                -np.asarray(f(x + 2 * e))
                + 8.0 * np.asarray(f(x + e))
                - 8.0 * np.asarray(f(x - e))
                + np.asarray(f(x - 2 * e))
            ) / (12.0 * h)
    return out


def richardson(coarse: np.ndarray, fine: np.ndarray, order: int) -> np.ndarray:
    """Combine estimates at step h and h/2 whose leading error is O(h^order)."""
    factor = 2.0**order
    return (factor * np.asarray(fine) - np.asarray(coarse)) / (factor - 1.0)


def loglog_slope(steps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(step)."""
    s = np.log(np.asarray(steps, dtype=float))
    e = np.log(np.maximum(np.asarray(errors, dtype=float), np.finfo(float).tiny))
    slope, _ = np.polyfit(s, e, 1)
    return float(slope)


def periodic_central_difference(n: int, dx: float) -> np.ndarray:
    """(f[i+1] - f[i-1]) / 2dx on a periodic grid as a dense real matrix."""
    d = np.zeros((n, n))
    idx = np.arange(n)
    d[idx, (idx + 1) % n] = 1.0
    d[idx, (idx - 1) % n] = -1.0
    return d / (2.0 * dx)


def periodic_laplacian(n: int, dx: float) -> np.ndarray:
    """(f[i+1] - 2 f[i] + f[i-1]) / dx^2 on a periodic grid."""
    d = -2.0 * np.eye(n)
    idx = np.arange(n)
    d[idx, (idx + 1) % n] += 1.0
    d[idx, (idx - 1) % n] += 1.0
    return d / dx**2
