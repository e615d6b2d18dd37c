"""Chart metrics and the builtin metric catalog.

Metric callbacks take a point of shape (n,) and return an (n, n) matrix.
Builtins are written against ``x[..., i]`` so they also accept stacks of
points of shape (..., n) and return (..., n, n); those are flagged
``vectorized`` and lattice code uses them without a Python loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from app.algebra.gamma_repr import minkowski_eta
from app.core.errors import SignatureError, SingularMetricError, StepTooSmallError
from app.core.models import MetricConfig


MetricFn = Callable[[np.ndarray], np.ndarray]

SYMMETRY_TOL = 1e-14
MIN_STEP_RATIO = 1e-7


@dataclass(frozen=True, eq=False)
class ChartMetric:
    n: int
    g: MetricFn
    eta: np.ndarray
    dg: MetricFn | None = None
    name: str = "custom"
    vectorized: bool = False
    params: dict[str, float] = field(default_factory=dict)
    # coordinate periods, None for non-periodic axes
    periods: tuple[float | None, ...] = ()

    def __post_init__(self) -> None:
        eta = np.asarray(self.eta, dtype=float)
        eta = np.diag(eta) if eta.ndim == 2 else eta
        if eta.shape != (self.n,) or not np.all(np.isin(eta, (-1.0, 1.0))):
            raise SignatureError(f"eta must hold {self.n} entries of +-1, got {eta.tolist()}")
        object.__setattr__(self, "eta", eta)
        if self.periods and len(self.periods) != self.n:
            raise SignatureError(f"periods must have {self.n} entries, got {len(self.periods)}")

    def separation(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """b - a with periodic coordinates reduced to [-period/2, period/2)."""
        delta = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        for axis, period in enumerate(self.periods):
            if period is not None:
                delta[..., axis] = (delta[..., axis] + 0.5 * period) % period - 0.5 * period
        return delta

    @property
    def signature(self) -> tuple[int, int]:
        p = int(np.count_nonzero(self.eta > 0))
        return p, self.n - p

    def at(self, x: np.ndarray) -> np.ndarray:
        """g(x), checked for symmetry and for the declared signature."""
        x = np.asarray(x, dtype=float)
        g = np.asarray(self.g(x), dtype=float)
        if g.shape != (self.n, self.n):
            raise SingularMetricError(f"metric {self.name} returned shape {g.shape}, expected {(self.n, self.n)}")
        scale = max(1.0, float(np.max(np.abs(g))))
        asym = float(np.max(np.abs(g - g.T)))
        if asym > SYMMETRY_TOL * scale:
            raise SignatureError(f"metric {self.name} not symmetric at x={x.tolist()}: asym={asym:.3e}")
        w = np.linalg.eigvalsh(g)
        if np.min(np.abs(w)) <= 1e-12 * scale:
            raise SingularMetricError(f"metric {self.name} singular at x={x.tolist()}: eigenvalues={w.tolist()}")
        p = int(np.count_nonzero(w > 0))
        if (p, self.n - p) != self.signature:
            raise SignatureError(
                f"metric {self.name} has signature ({p},{self.n - p}) at x={x.tolist()}, declared {self.signature}"
            )
        return g

    def field(self, points: np.ndarray) -> np.ndarray:
        """g at a stack of points (..., n) -> (..., n, n), without signature checks."""
        points = np.asarray(points, dtype=float)
        if self.vectorized:
            return np.asarray(self.g(points), dtype=float)
        flat = points.reshape(-1, self.n)
        out = np.stack([np.asarray(self.g(p), dtype=float) for p in flat])
        return out.reshape(points.shape[:-1] + (self.n, self.n))

    def derivative(self, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
        """dg[alpha, mu, nu] = d_alpha g_{mu nu} at a single point."""
        x = np.asarray(x, dtype=float)
        if self.dg is not None:
            return np.asarray(self.dg(x), dtype=float)
        _check_step(x, h)

        def g(y: np.ndarray) -> np.ndarray:
            return np.asarray(self.g(y), dtype=float)

        out = np.zeros((self.n, self.n, self.n))
        for alpha in range(self.n):
            e = np.zeros(self.n)
            e[alpha] = h
            out[alpha] = (-g(x + 2 * e) + 8.0 * g(x + e) - 8.0 * g(x - e) + g(x - 2 * e)) / (12.0 * h)
        return out

    def derivative_field(self, points: np.ndarray, h: float = 1e-4) -> np.ndarray:
        """dg at a stack of points (..., n) -> (..., n, n, n) with the alpha axis first after the stack."""
        points = np.asarray(points, dtype=float)
        if self.dg is not None and self.vectorized:
            return np.asarray(self.dg(points), dtype=float)
        if not self.vectorized:
            flat = points.reshape(-1, self.n)
            out = np.stack([self.derivative(p, h) for p in flat])
            return out.reshape(points.shape[:-1] + (self.n, self.n, self.n))
        _check_step(points, h)
        parts = []
        for alpha in range(self.n):
            e = np.zeros(self.n)
            e[alpha] = h
            parts.append(
                (-self.field(points + 2 * e) + 8.0 * self.field(points + e)
                 - 8.0 * self.field(points - e) + self.field(points - 2 * e)) / (12.0 * h)
            )
        return np.stack(parts, axis=-3)


def _check_step(x: np.ndarray, h: float) -> None:
    scale = max(1.0, float(np.max(np.abs(x)))) if np.size(x) else 1.0
    if h < MIN_STEP_RATIO * scale:
        raise StepTooSmallError(f"derivative step h={h:.1e} below {MIN_STEP_RATIO:.0e} x coordinate scale {scale:.3g}")


def _diag_field(x: np.ndarray, entries: list[np.ndarray]) -> np.ndarray:
    n = len(entries)
    out = np.zeros(x.shape[:-1] + (n, n))
    for i, value in enumerate(entries):
        out[..., i, i] = value
    return out


def minkowski(dim: int = 4, convention: str = "mostly-minus") -> ChartMetric:
    eta = minkowski_eta(dim, convention)
    diag = np.diag(eta)

    def g(x: np.ndarray) -> np.ndarray:
        return _diag_field(x, [np.full(x.shape[:-1], v) for v in diag])

    def dg(x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (dim, dim, dim))

    return ChartMetric(dim, g, eta, dg=dg, name="minkowski", vectorized=True, params={"dim": dim})


def polar_flat_2d() -> ChartMetric:
    """Euclidean plane in (r, theta): g = diag(1, r^2)."""

    def g(x: np.ndarray) -> np.ndarray:
        r = x[..., 0]
        return _diag_field(x, [np.ones_like(r), r * r])

    def dg(x: np.ndarray) -> np.ndarray:
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 1, 1] = 2.0 * x[..., 0]
        return out

    return ChartMetric(
        2, g, np.array([1.0, 1.0]), dg=dg, name="polar_flat_2d", vectorized=True, periods=(None, 2.0 * np.pi)
    )


def frw_1p1(epsilon: float = 0.1) -> ChartMetric:
    """(t, x) with g = diag(-1, a(t)^2), a(t) = 1 + epsilon t."""

    def g(x: np.ndarray) -> np.ndarray:
        a = 1.0 + epsilon * x[..., 0]
        return _diag_field(x, [-np.ones_like(a), a * a])

    def dg(x: np.ndarray) -> np.ndarray:
        a = 1.0 + epsilon * x[..., 0]
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 1, 1] = 2.0 * epsilon * a
        return out

    return ChartMetric(
        2, g, np.array([-1.0, 1.0]), dg=dg, name="frw_1p1", vectorized=True, params={"epsilon": epsilon}
    )


def rindler_1p1(acceleration: float = 1.0) -> ChartMetric:
    """(t, x) with g = diag(-(1 + a x)^2, 1), valid for 1 + a x > 0."""

    def g(x: np.ndarray) -> np.ndarray:
        lapse = 1.0 + acceleration * x[..., 1]
        return _diag_field(x, [-(lapse * lapse), np.ones_like(lapse)])

    def dg(x: np.ndarray) -> np.ndarray:
        lapse = 1.0 + acceleration * x[..., 1]
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 1, 0, 0] = -2.0 * acceleration * lapse
        return out

    return ChartMetric(
        2, g, np.array([-1.0, 1.0]), dg=dg, name="rindler_1p1", vectorized=True,
        params={"acceleration": acceleration},
    )


def infer_eta(g0: np.ndarray) -> np.ndarray:
    """Frame signature for a sample metric value.

    Uses the signs of the diagonal when they carry the right counts, otherwise
    puts the minority sign first.
    """
    g0 = np.asarray(g0, dtype=float)
    n = g0.shape[0]
    p = int(np.count_nonzero(np.linalg.eigvalsh(g0) > 0))
    diag_signs = np.sign(np.diag(g0))
    if np.all(diag_signs != 0) and int(np.count_nonzero(diag_signs > 0)) == p:
        return diag_signs.astype(float)
    if 0 < p < n and p < n - p:
        return np.array([1.0] * p + [-1.0] * (n - p))
    return np.array([-1.0] * (n - p) + [1.0] * p)


def constant_metric(g0: np.ndarray, eta: np.ndarray | None = None, name: str = "table") -> ChartMetric:
    g0 = np.asarray(g0, dtype=float)
    n = g0.shape[0]
    if eta is None:
        eta = infer_eta(g0)

    def g(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(g0, x.shape[:-1] + (n, n)).copy()

    def dg(x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1] + (n, n, n))

    return ChartMetric(n, g, eta, dg=dg, name=name, vectorized=True)


def random_smooth_metric(
    eta: np.ndarray,
    rng: np.random.Generator,
    amplitude: float = 0.1,
    wavenumber: float = 1.0,
) -> ChartMetric:
    """g(x) = A(x)^T eta A(x) with A(x) = I + amplitude * sum_a sin(k x_a + phase_a) B_a.

    Each B_a has unit spectral norm, so A(x) stays invertible for
    amplitude < 1/n and the signature of eta is kept everywhere.
    """
    eta = np.asarray(eta, dtype=float)
    eta = np.diag(eta) if eta.ndim == 2 else eta
    n = eta.size
    if amplitude * n >= 1.0:
        raise ValueError(f"amplitude must be < 1/n = {1.0 / n:.3g}, got {amplitude}")
    blocks = rng.standard_normal((n, n, n))
    blocks /= np.linalg.norm(blocks, ord=2, axis=(1, 2))[:, None, None]
    phases = rng.uniform(0.0, 2.0 * np.pi, n)
    eta_m = np.diag(eta)

    def g(x: np.ndarray) -> np.ndarray:
        s = np.sin(wavenumber * x + phases)
        a = np.eye(n) + amplitude * np.einsum("...a,aij->...ij", s, blocks)
        out = np.swapaxes(a, -1, -2) @ eta_m @ a
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    return ChartMetric(n, g, eta, name="random_smooth", vectorized=True, params={"amplitude": amplitude})


def metric_from_config(cfg: MetricConfig) -> ChartMetric:
    params = cfg.params
    if cfg.kind == "table":
        eta = params.get("eta")
        return constant_metric(np.asarray(params["g"], dtype=float), None if eta is None else np.asarray(eta), cfg.name)
    if cfg.name == "minkowski":
        return minkowski(cfg.dim, str(params.get("convention", "mostly-minus")))
    if cfg.dim != 2:
        raise SignatureError(f"builtin metric {cfg.name} is two-dimensional, config says dim={cfg.dim}")
    if cfg.name == "polar_flat_2d":
        return polar_flat_2d()
    if cfg.name == "frw_1p1":
        return frw_1p1(float(params.get("epsilon", 0.1)))
    if cfg.name == "rindler_1p1":
        return rindler_1p1(float(params.get("acceleration", 1.0)))
    raise SignatureError(f"unknown builtin metric {cfg.name!r}")
