"""Experiment runner: initial data, engine dispatch and observable series.

States are evolved in the trivialized (bundle) frame Psi = L^-1 psi with the
conjugated Hamiltonian L^-1 H L; observables are always read off the physical
state psi = L Psi, so identity and non-identity trivializations report the
same columns.

A non-Minkowski metric must be a regular diagonal Lorentzian (t, x) chart over the
lattice and the run's time span. The Dirac engine then evolves the density-weighted
spinor under the chart Hamiltonian; a time-dependent chart is stepped with H at each
step midpoint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from app.algebra.gamma_repr import MatrixRep, dirac_gammas
from app.bundle.trivializations import Trivialization, trivialization_from_config
from app.core.errors import CliffBundleError, ConfigError, DimensionMismatchError
from app.core.linalg import expm, periodic_central_difference
from app.core.logger import logger
from app.core.models import EvolutionConfig, ExperimentConfig, InitialConfig, LatticeConfig
from app.evolution.dirac import chart_factors, chiral_spinor, curved_dirac_hamiltonian, dirac_hamiltonian
from app.evolution.klein_gordon import TAU_3, kg_first_order, kg_from_first_order, kg_hamiltonian, kg_leapfrog, kinetic_operator
from app.evolution.operators import momentum_operator, momentum_rep
from app.evolution.propagators import (
    LatticeState,
    Trajectory,
    check_stability,
    evolve_static,
    static_step,
    time_ordered_evolve,
)
from app.geometry.metrics import ChartMetric, metric_from_config


COMPONENTS = {"dirac1p1": 2, "kg": 2, "schrodinger": 1}


def schrodinger_hamiltonian(n: int, dx: float, cfg: EvolutionConfig) -> np.ndarray:
    """H = Pi^2 / 2m + e A_0 with Pi = -i hbar d_x - (e/c) A_1."""
    if cfg.m <= 0.0:
        raise ValueError(f"schrodinger engine needs m > 0, got m={cfg.m}")
    h = kinetic_operator(n, dx, cfg) / (2.0 * cfg.m)
    if cfg.a0 is not None:
        a0 = np.asarray(cfg.a0, dtype=float)
        if a0.shape != (n,):
            raise DimensionMismatchError(f"a0 has {a0.size} samples, lattice has {n}")
        h = h + cfg.e * np.diag(a0)
    return h


def schrodinger_evolve(state: LatticeState, cfg: EvolutionConfig, record_every: int = 1) -> Trajectory:
    if state.components != 1:
        raise DimensionMismatchError(f"schrodinger state needs 1 component, got {state.components}")
    h = schrodinger_hamiltonian(state.n, state.dx, cfg)
    return evolve_static(h, state, cfg.dt, cfg.steps, cfg.hbar, record_every)


def _envelope(lattice: LatticeConfig, initial: InitialConfig) -> tuple[np.ndarray, float]:
    """Scalar profile and the carrier wavenumber it was built with."""
    x = np.arange(lattice.n) * lattice.dx
    center = lattice.length / 2.0 if initial.center is None else initial.center
    if initial.kind == "rest":
        return np.full(lattice.n, initial.amplitude, dtype=complex), 0.0
    if initial.kind == "planewave":
        # periodic lattice only carries k = 2 pi j / L
        length = lattice.length
        k = 2.0 * np.pi * round(initial.k * length / (2.0 * np.pi)) / length
        return initial.amplitude * np.exp(1j * k * x), k
    gauss = np.exp(-((x - center) ** 2) / (2.0 * initial.width**2))
    return initial.amplitude * gauss * np.exp(1j * initial.k * x), initial.k


def initial_state(
    lattice: LatticeConfig,
    initial: InitialConfig,
    engine: str = "dirac1p1",
    cfg: EvolutionConfig | None = None,
    rep: MatrixRep | None = None,
) -> LatticeState:
    profile, k = _envelope(lattice, initial)
    if engine == "schrodinger":
        return LatticeState(profile, lattice.dx)
    if engine == "kg":
        cfg = cfg or EvolutionConfig(m=1.0)
        omega = np.sqrt((cfg.c * k) ** 2 + (cfg.m * cfg.c**2 / cfg.hbar) ** 2)
        return kg_first_order(profile, -1j * omega * profile, cfg.m, lattice.dx, cfg.hbar, cfg.c)
    if engine != "dirac1p1":
        raise ValueError(f"unknown engine {engine!r}")
    spinor = np.array([1.0, 0.0], dtype=complex) if initial.kind == "rest" else chiral_spinor(initial.chirality, rep)
    return LatticeState(np.outer(profile, spinor), lattice.dx)


@dataclass
class ExperimentResult:
    engine: str
    trivialization: str
    times: np.ndarray
    norms: np.ndarray
    expectation_p: np.ndarray
    states: list[np.ndarray] | None = None
    residuals: np.ndarray | None = None
    dx: float = 1.0
    wall_time: float = 0.0
    notes: dict[str, float] = field(default_factory=dict)

    def series_header(self) -> list[str]:
        header = ["t", "norm", "re_p", "im_p"]
        if self.residuals is not None:
            header.append("residual")
        return header

    def series_rows(self) -> list[list[float]]:
        rows = []
        for i, t in enumerate(self.times):
            p = self.expectation_p[i]
            row = [float(t), float(self.norms[i]), float(p.real), float(p.imag)]
            if self.residuals is not None:
                row.append(float(self.residuals[i]))
            rows.append(row)
        return rows

    def summary(self, include_timing: bool = False) -> dict[str, object]:
        out: dict[str, object] = {
            "engine": self.engine,
            "trivialization": self.trivialization,
            "steps": int(self.times.size - 1),
            "t_final": float(self.times[-1]),
            "norm_initial": float(self.norms[0]),
            "norm_final": float(self.norms[-1]),
            "norm_drift": float(np.max(np.abs(self.norms - self.norms[0]))),
            "p_initial": [float(self.expectation_p[0].real), float(self.expectation_p[0].imag)],
            "p_final": [float(self.expectation_p[-1].real), float(self.expectation_p[-1].imag)],
            "p_drift": float(np.max(np.abs(self.expectation_p - self.expectation_p[0]))),
        }
        if self.residuals is not None:
            out["max_residual"] = float(np.max(self.residuals))
        out.update(self.notes)
        if include_timing:
            out["wall_time"] = self.wall_time
        return out

    def trajectory_array(self) -> np.ndarray:
        if self.states is None:
            raise ValueError("trajectory output was not requested")
        return np.stack(self.states)


@dataclass(frozen=True)
class _Chart:
    metric: ChartMetric
    static: bool


def experiment_chart(config: ExperimentConfig) -> _Chart | None:
    """The run's chart, or None on Minkowski; raises ConfigError unless it is usable for the whole run."""
    if config.metric.kind == "builtin" and config.metric.name == "minkowski" and config.metric.dim == 2:
        return None
    try:
        metric = metric_from_config(config.metric)
    except CliffBundleError as exc:
        raise ConfigError(f"field metric: {exc}") from exc
    if metric.n != 2 or metric.eta[0] != -metric.eta[1]:
        raise ConfigError(
            f"field metric: evolution needs a Lorentzian (t, x) chart, got {metric.name} with eta={metric.eta.tolist()}"
        )
    n, dx, cfg = config.lattice.n, config.lattice.dx, config.cfg
    # record times and step midpoints
    times = 0.5 * cfg.dt * np.arange(2 * cfg.steps + 1)
    t, x = np.meshgrid(times, np.arange(n) * dx, indexing="ij")
    with np.errstate(all="ignore"):
        g = metric.field(np.stack([t, x], axis=-1))
    t_final = cfg.dt * cfg.steps
    if not np.all(np.isfinite(g)):
        raise ConfigError(f"field metric: {metric.name} is not finite on the lattice for t in [0, {t_final:g}]")
    if np.max(np.abs(g[..., 0, 1])) > 1e-12 * np.max(np.abs(g)):
        raise ConfigError(f"field metric: {metric.name} is not diagonal in (t, x)")
    signs_ok = (np.sign(g[..., 0, 0]) == metric.eta[0]) & (np.sign(g[..., 1, 1]) == metric.eta[1])
    regular = (np.abs(g[..., 0, 0]) > 1e-12) & (np.abs(g[..., 1, 1]) > 1e-12)
    if not np.all(signs_ok & regular):
        bad = np.argwhere(~(signs_ok & regular))[0]
        raise ConfigError(
            f"field metric: {metric.name} is singular or changes signature at t={times[bad[0]]:g} x={bad[1] * dx:g}"
        )
    static = bool(np.allclose(g, g[:1], rtol=0.0, atol=1e-14))
    logger.debug(f"experiment chart={metric.name} static={static}")
    return _Chart(metric, static)


def _hamiltonian(config: ExperimentConfig, rep: MatrixRep, chart: _Chart | None = None, t: float = 0.0) -> np.ndarray:
    n, dx = config.lattice.n, config.lattice.dx
    if config.engine == "dirac1p1":
        if chart is None:
            return dirac_hamiltonian(n, dx, config.cfg, rep)
        return curved_dirac_hamiltonian(n, dx, config.cfg, chart.metric, t, rep)
    if config.engine == "kg":
        return kg_hamiltonian(n, dx, config.cfg)
    return schrodinger_hamiltonian(n, dx, config.cfg)


class _Observables:
    """Norm and momentum read-outs for one engine, applied to physical states.

    On a chart the Dirac momentum is taken on psi = chi / sqrt(A) with the frame and
    spin connection of the recorded time, weighted by the spatial volume A dx.
    """

    def __init__(self, config: ExperimentConfig, rep: MatrixRep, chart: _Chart | None = None) -> None:
        n, dx, hbar = config.lattice.n, config.lattice.dx, config.cfg.hbar
        self.n, self.dx, self.hbar = n, dx, hbar
        self.chart = chart
        self._operators: dict[float, np.ndarray] = {}
        if config.engine == "dirac1p1":
            self.op_rep = momentum_rep(rep, None if chart is None else chart.metric)
            self.p = momentum_operator(n, dx, self.op_rep, hbar=hbar) if chart is None else None
            self.p_weight = np.kron(np.eye(n), self.op_rep.gammas[0])
            self.n_weight = None
        else:
            d = COMPONENTS[config.engine]
            self.p = np.kron(-1j * hbar * periodic_central_difference(n, dx), np.eye(d))
            # kg charge: psi^dagger tau_3 psi is the conserved density of the reduction
            weight = np.kron(np.eye(n), TAU_3) if config.engine == "kg" else None
            self.p_weight = weight
            self.n_weight = weight

    def operator(self, t: float) -> np.ndarray:
        if self.chart is None:
            return self.p
        key = 0.0 if self.chart.static else float(t)
        if key not in self._operators:
            self._operators[key] = momentum_operator(
                self.n, self.dx, self.op_rep, metric=self.chart.metric, hbar=self.hbar, time=key
            )
        return self._operators[key]

    def norm(self, psi: np.ndarray) -> float:
        if self.n_weight is None:
            return float(np.vdot(psi, psi).real * self.dx)
        return float(np.vdot(psi, self.n_weight @ psi).real * self.dx)

    def momentum(self, psi: np.ndarray, t: float = 0.0) -> complex:
        volume = None
        if self.chart is not None:
            _, scale = chart_factors(self.chart.metric, self.n, self.dx, t)
            volume = np.repeat(scale, self.op_rep.size)
            psi = psi / np.sqrt(volume)
        moved = self.operator(t) @ psi
        if self.p_weight is not None:
            moved = self.p_weight @ moved
        if volume is not None:
            moved = volume * moved
        return complex(np.vdot(psi, moved) * self.dx)


def _lift(l: Trivialization, lattice: LatticeConfig) -> tuple[np.ndarray, np.ndarray]:
    coords = [np.array([x]) for x in lattice.coordinates()]
    return l.block(coords)


def _kg_reference(config: ExperimentConfig, psi0: LatticeState, times: np.ndarray, states: list[np.ndarray]) -> np.ndarray:
    cfg = config.cfg
    kinetic = kinetic_operator(config.lattice.n, config.lattice.dx, cfg)
    phi, vel = kg_from_first_order(psi0, cfg.m, cfg.hbar, cfg.c)
    out = np.zeros(times.size)
    for j in range(1, times.size):
        phi, vel = kg_leapfrog(phi, vel, cfg.m, config.lattice.dx, cfg.dt, 1, cfg.hbar, cfg.c, kinetic=kinetic)
        phi_exact, _ = kg_from_first_order(psi0.with_flat(states[j]), cfg.m, cfg.hbar, cfg.c)
        out[j] = float(np.max(np.abs(phi - phi_exact)))
    return out


def _direct_reference(h: np.ndarray, psi0: np.ndarray, times: np.ndarray, states: list[np.ndarray], hbar: float) -> np.ndarray:
    out = np.zeros(times.size)
    for j in range(1, times.size):
        ref = expm(-1j * times[j] / hbar * h) @ psi0
        out[j] = float(np.max(np.abs(states[j] - ref)))
    return out


def _refined_reference(
    h: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    times: np.ndarray,
    states: list[np.ndarray],
    hbar: float,
    substeps: int = 4,
) -> np.ndarray:
    """Distance to an unlifted midpoint run with substeps per step, for time-dependent H."""
    out = np.zeros(times.size)
    ref = psi0
    for j in range(1, times.size):
        ref, _ = time_ordered_evolve(h, ref, times[j - 1], times[j], substeps, hbar)
        out[j] = float(np.max(np.abs(states[j] - ref)))
    return out


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    started = time.perf_counter()
    chart = experiment_chart(config) if config.engine == "dirac1p1" else None
    rep = dirac_gammas("mostly-minus", dim=2)
    state0 = initial_state(config.lattice, config.initial, config.engine, config.cfg, rep)
    l = trivialization_from_config(config.trivialization, state0.components)
    l_block, l_inv_block = _lift(l, config.lattice)
    cfg = config.cfg

    lifted = state0.with_flat(l_inv_block @ state0.flat())
    logger.info(
        f"experiment engine={config.engine} n={config.lattice.n} dx={config.lattice.dx} "
        f"dt={cfg.dt} steps={cfg.steps} trivialization={l.name} metric={config.metric.name}"
    )
    static = chart is None or chart.static
    h = _hamiltonian(config, rep, chart)
    # the guard looks at the physical H; conjugation only changes the basis
    check_stability(h, cfg.dt, cfg.hbar)
    step = static_step(l_inv_block @ h @ l_block, cfg.dt, cfg.hbar)
    big_psi = lifted.flat()
    physical = [l_block @ big_psi]
    for j in range(cfg.steps):
        if not static:
            h_mid = _hamiltonian(config, rep, chart, (j + 0.5) * cfg.dt)
            check_stability(h_mid, cfg.dt, cfg.hbar)
            step = static_step(l_inv_block @ h_mid @ l_block, cfg.dt, cfg.hbar)
        big_psi = step @ big_psi
        physical.append(l_block @ big_psi)
    times = cfg.dt * np.arange(cfg.steps + 1)

    obs = _Observables(config, rep, chart)
    norms = np.array([obs.norm(psi) for psi in physical])
    momenta = np.array([obs.momentum(psi, t) for psi, t in zip(physical, times)], dtype=complex)

    residuals = None
    if config.cross_check:
        if config.engine == "kg":
            residuals = _kg_reference(config, state0, times, physical)
        elif static:
            residuals = _direct_reference(h, state0.flat(), times, physical, cfg.hbar)
        else:
            residuals = _refined_reference(
                lambda t: _hamiltonian(config, rep, chart, t), state0.flat(), times, physical, cfg.hbar
            )

    states = None
    if "trajectory" in config.outputs:
        states = [psi.reshape(state0.n, state0.components) for psi in physical]

    result = ExperimentResult(
        engine=config.engine,
        trivialization=l.name,
        times=times,
        norms=norms,
        expectation_p=momenta,
        states=states,
        residuals=residuals,
        dx=config.lattice.dx,
        wall_time=time.perf_counter() - started,
    )
    logger.info(
        f"experiment done engine={config.engine} norm_drift={result.summary()['norm_drift']:.3e} "
        f"p_drift={result.summary()['p_drift']:.3e}"
    )
    return result
