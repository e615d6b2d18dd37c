"""Executable invariant checks grouped into suites.

Every check is a function (ctx, rng) -> CheckResult registered under a
dotted name whose first part is the suite. Each check draws from its own
generator seeded by (seed, crc32(name)), so results do not depend on which
worker ran it or in which order.
"""

from __future__ import annotations

import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from app.algebra.clifford_core import (
    blade_associativity_violations,
    check_matrix_isomorphism,
    generator_relation_residual,
    make_algebra,
)
from app.algebra.gamma_repr import (
    MatrixRep,
    dirac_gammas,
    dual_gammas,
    gamma_five,
    gammas_for_metric,
    lorentz_from_spinor,
    random_sl2c,
    sl2c_embed,
    spin_boost,
    spin_rotate,
)
from app.bundle.transport import (
    PathSpec,
    SectionAlongPath,
    bundle_gammas,
    connection_from_transport,
    evolution_transport,
    frozen_propagator,
    hamiltonian_from_transport,
    midpoint_propagator,
    path_derivation,
    straight_path,
    transport_from_hamiltonian,
)
from app.bundle.trivializations import identity_trivialization, random_smooth_trivialization
from app.core.linalg import loglog_slope, unitarity_residual
from app.core.logger import logger
from app.core.models import EvolutionConfig, ExperimentConfig, InitialConfig, LatticeConfig, thread_cap
from app.evolution.dirac import dirac_evolve_1p1
from app.evolution.experiment import initial_state, run_experiment
from app.evolution.klein_gordon import kg_evolve, kg_first_order, kg_from_first_order, kg_leapfrog
from app.evolution.operators import (
    dirac_hermiticity_residual,
    expectation_momentum,
    momentum_density_expectation,
    momentum_operator,
    spin_vector_assemble,
    stress_energy_contract,
)
from app.evolution.propagators import LatticeState, time_ordered_evolve
from app.geometry.frames import (
    metric_compatibility_residual,
    spin_connection_at,
    spin_curvature_at,
    spinor_holonomy,
    vierbein_at,
)
from app.geometry.lattice import LatticeField, dalembert_discretization_error
from app.geometry.metrics import frw_1p1, minkowski, polar_flat_2d
from app.verify.report import CheckResult, VerificationReport


SUITES = ("clifford", "gamma", "geometry", "bundle", "evolution")


@dataclass(frozen=True)
class VerifyContext:
    seed: int = 0
    tolerance_scale: float = 1.0
    perturb: float = 0.0

    def tol(self, base: float) -> float:
        return base * self.tolerance_scale

    def rep(self, rep: MatrixRep, rng: np.random.Generator) -> MatrixRep:
        """rep itself, or a noisy copy in injected-fault mode."""
        return rep.perturbed(self.perturb, rng) if self.perturb > 0.0 else rep

    def inject(self, m: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.perturb <= 0.0:
            return m
        noise = rng.standard_normal(np.shape(m)) + 1j * rng.standard_normal(np.shape(m))
        return m + self.perturb * noise


Check = Callable[[VerifyContext, np.random.Generator], CheckResult]
REGISTRY: dict[str, Check] = {}


def register(name: str) -> Callable[[Check], Check]:
    def decorator(func: Check) -> Check:
        if name in REGISTRY:
            raise ValueError(f"check {name!r} registered twice")
        REGISTRY[name] = func
        return func

    return decorator


def _random_hermitian(rng: np.random.Generator, d: int, norm: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (a + a.conj().T)
    return norm * h / np.linalg.norm(h, 2)


# --- clifford ----------------------------------------------------------------

_SIGNATURES = ((3, 1), (1, 3), (2, 0), (1, 1))


def _relations_check(p: int, q: int, ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    alg = make_algebra(p, q)
    rep = ctx.rep(gammas_for_metric([1.0] * p + [-1.0] * q), rng)
    report = check_matrix_isomorphism(alg, rep, tol=ctx.tol(1e-12))
    table_residual = generator_relation_residual(alg)
    ok = report.relations_ok and report.independent and table_residual == 0
    return CheckResult(
        f"clifford.relations.cl{p}{q}",
        report.relation_residual,
        ctx.tol(1e-12),
        ok,
        f"rank={report.rank} blades={report.blade_count} table_residual={table_residual}",
    )


for _p, _q in _SIGNATURES:
    register(f"clifford.relations.cl{_p}{_q}")(partial(_relations_check, _p, _q))


@register("clifford.associativity.cl31")
def _associativity_blades(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    violations = blade_associativity_violations(make_algebra(3, 1))
    return CheckResult.below("clifford.associativity.cl31", violations, 0.5, "blade triples with sign mismatch")


@register("clifford.associativity.random")
def _associativity_random(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    alg = make_algebra(3, 1)
    worst = 0.0
    for _ in range(20):
        a, b, c = alg.random(rng), alg.random(rng), alg.random(rng)
        worst = max(worst, ((a * b) * c - a * (b * c)).norm())
    return CheckResult.below("clifford.associativity.random", worst, ctx.tol(1e-12))


_TWO_BY_TWO = {
    "cl20": (np.array([[[0, 1], [1, 0]], [[1, 0], [0, -1]]], dtype=float), (1.0, 1.0), (2, 0)),
    "cl11": (np.array([[[0, 1], [1, 0]], [[0, 1], [-1, 0]]], dtype=float), (1.0, -1.0), (1, 1)),
}


def _isomorphism_check(key: str, ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    gammas, eta, (p, q) = _TWO_BY_TWO[key]
    rep = ctx.rep(MatrixRep(gammas, eta, convention=key), rng)
    report = check_matrix_isomorphism(make_algebra(p, q), rep, tol=ctx.tol(1e-12))
    return CheckResult(
        f"clifford.isomorphism.{key}",
        report.relation_residual,
        ctx.tol(1e-12),
        report.isomorphism,
        f"rank={report.rank} target={report.matrix_dimension} field={report.field}",
    )


for _key in _TWO_BY_TWO:
    register(f"clifford.isomorphism.{_key}")(partial(_isomorphism_check, _key))


# --- gamma -------------------------------------------------------------------


def _dirac_relations(convention: str, dim: int, ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = ctx.rep(dirac_gammas(convention, dim), rng)
    return CheckResult.below(f"gamma.relations.{convention}.d{dim}", rep.relation_residual(), ctx.tol(1e-12))


for _conv in ("mostly-minus", "mostly-plus"):
    for _dim in (2, 4):
        register(f"gamma.relations.{_conv}.d{_dim}")(partial(_dirac_relations, _conv, _dim))


@register("gamma.contraction")
def _contraction(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = ctx.rep(dirac_gammas("mostly-minus", 4), rng)
    upper = dual_gammas(rep).gammas
    total = np.einsum("mij,mjk->ik", rep.gammas, upper)
    return CheckResult.below("gamma.contraction", np.max(np.abs(total - 4.0 * np.eye(4))), ctx.tol(1e-12))


@register("gamma.double_cover")
def _double_cover(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = dirac_gammas("mostly-minus", 4)
    turn = ctx.inject(spin_rotate(rep, (1, 2), 2.0 * np.pi), rng)
    two_turns = spin_rotate(rep, (1, 2), 4.0 * np.pi)
    residual = max(np.max(np.abs(turn + np.eye(4))), np.max(np.abs(two_turns - np.eye(4))))
    return CheckResult.below("gamma.double_cover", residual, ctx.tol(1e-10), "2pi -> -1, 4pi -> +1")


@register("gamma.sl2c_homomorphism")
def _sl2c_homomorphism(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(10):
        a, b = random_sl2c(rng), random_sl2c(rng)
        worst = max(worst, float(np.max(np.abs(ctx.inject(sl2c_embed(a @ b), rng) - sl2c_embed(a) @ sl2c_embed(b)))))
    return CheckResult.below("gamma.sl2c_homomorphism", worst, ctx.tol(1e-10))


@register("gamma.chirality")
def _chirality(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = ctx.rep(dirac_gammas("mostly-minus", 4), rng)
    g5 = gamma_five(rep)
    residual = float(np.max(np.abs(g5 @ g5 - np.eye(4))))
    for g in rep.gammas:
        residual = max(residual, float(np.max(np.abs(g5 @ g + g @ g5))))
    return CheckResult.below("gamma.chirality", residual, ctx.tol(1e-12))


# --- geometry ----------------------------------------------------------------


@register("geometry.minkowski_connection")
def _minkowski_connection(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    x = rng.uniform(-2.0, 2.0, size=2)
    omega = ctx.inject(spin_connection_at(minkowski(2), x).omega, rng)
    return CheckResult.below("geometry.minkowski_connection", np.max(np.abs(omega)), ctx.tol(1e-14))


@register("geometry.polar_antisymmetry")
def _polar_antisymmetry(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    x = np.array([rng.uniform(0.5, 3.0), rng.uniform(0.0, 2.0 * np.pi)])
    omega = spin_connection_at(polar_flat_2d(), x).spin_omega
    residual = float(np.max(np.abs(omega + np.swapaxes(omega, 0, 1))))
    nonzero = float(np.max(np.abs(omega)))
    return CheckResult(
        "geometry.polar_antisymmetry", residual, 0.0, residual == 0.0 and nonzero > 0.5, f"max|omega|={nonzero:.6f}"
    )


@register("geometry.polar_curvature")
def _polar_curvature(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    x = np.array([rng.uniform(1.0, 3.0), rng.uniform(0.0, 2.0 * np.pi)])
    curvature = ctx.inject(spin_curvature_at(polar_flat_2d(), x), rng)
    return CheckResult.below("geometry.polar_curvature", np.max(np.abs(curvature)), ctx.tol(1e-5))


@register("geometry.vierbein")
def _vierbein(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    metric = frw_1p1(0.1)
    x = rng.uniform(0.0, 1.0, size=2)
    vb = vierbein_at(metric, x)
    return CheckResult.below("geometry.vierbein", vb.residual(metric.at(x)), ctx.tol(1e-12))


@register("geometry.metric_compatibility")
def _compatibility(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    x = rng.uniform(0.0, 1.0, size=2)
    return CheckResult.below("geometry.metric_compatibility", metric_compatibility_residual(frw_1p1(0.1), x), ctx.tol(1e-8))


@register("geometry.polar_holonomy")
def _polar_holonomy(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    holonomy = spinor_holonomy(polar_flat_2d(), lambda t: np.array([1.0, 2.0 * np.pi * t]), steps=400)
    holonomy = ctx.inject(holonomy, rng)
    residual = float(np.max(np.abs(holonomy + np.eye(holonomy.shape[0]))))
    return CheckResult.below("geometry.polar_holonomy", residual, ctx.tol(1e-6), "loop around the origin -> -1")


def frw_wave(p: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * p[..., 0] + 0.5) * np.cos(p[..., 1])


def frw_wave_box(epsilon: float) -> Callable[[np.ndarray], np.ndarray]:
    """Exact box phi for frw_wave on frw_1p1(epsilon): -phi_tt - (a'/a) phi_t + phi_xx / a^2."""

    def box(p: np.ndarray) -> np.ndarray:
        t, x = p[..., 0], p[..., 1]
        a = 1.0 + epsilon * t
        s, c = np.sin(2.0 * t + 0.5), np.cos(2.0 * t + 0.5)
        return (4.0 * s - 2.0 * epsilon / a * c - s / (a * a)) * np.cos(x)

    return box


@register("geometry.dalembert_order")
def _dalembert_order(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    epsilon = 0.1
    metric = frw_1p1(epsilon)
    sizes = (32, 64, 128)
    factorized, flux, agreement = [], [], 0.0
    for n in sizes:
        field = LatticeField.for_box(frw_wave, (0.0, 0.0), (1.0, 1.0), (n, n), vectorized=True)
        if ctx.perturb > 0.0:
            noisy = field.data + ctx.perturb * rng.standard_normal(field.data.shape)
            field = LatticeField(noisy, field.spacing, field.origin, field.ghost)
        residual, lhs_error, rhs_error = dalembert_discretization_error(field, metric, frw_wave_box(epsilon))
        agreement = max(agreement, residual)
        factorized.append(lhs_error)
        flux.append(rhs_error)
    steps = [1.0 / n for n in sizes]
    slope = min(loglog_slope(steps, factorized), loglog_slope(steps, flux))
    ok = slope >= 1.9 / ctx.tolerance_scale and agreement < ctx.tol(1e-8)
    return CheckResult(
        "geometry.dalembert_order",
        slope,
        1.9,
        ok,
        f"agreement={agreement:.2e} errors=" + ",".join(f"{a:.3e}/{b:.3e}" for a, b in zip(factorized, flux)),
    )


# --- bundle ------------------------------------------------------------------


@register("bundle.gamma_relations")
def _bundle_gammas(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = ctx.rep(dirac_gammas("mostly-minus", 4), rng)
    worst = 0.0
    for _ in range(20):
        l = random_smooth_trivialization(4, 1, seed=int(rng.integers(0, 2**31)), amplitude=0.4)
        worst = max(worst, bundle_gammas(rep, l, rng.uniform(-3.0, 3.0)).relation_residual())
    return CheckResult.below("bundle.gamma_relations", worst, ctx.tol(1e-12), "20 random smooth trivializations")


@register("bundle.transport_laws")
def _transport_laws(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    h0, h1 = _random_hermitian(rng, 4), _random_hermitian(rng, 4)
    l = random_smooth_trivialization(4, 1, seed=int(rng.integers(0, 2**31)))
    path = straight_path(0.0, 1.0, 51)
    u = transport_from_hamiltonian(lambda t: h0 + t * h1, path, l)
    worst = 0.0
    for t, s, r in rng.uniform(0.0, 1.0, size=(100, 3)):
        identity = float(np.max(np.abs(ctx.inject(u(t, t), rng) - np.eye(4))))
        cocycle = float(np.max(np.abs(ctx.inject(u(t, s), rng) @ ctx.inject(u(s, r), rng) - u(t, r))))
        worst = max(worst, identity, cocycle)
    return CheckResult.below("bundle.transport_laws", worst, ctx.tol(1e-10), "100 random (t, s, r)")


def _noisy_propagator(u: Callable[[float, float], np.ndarray], noise: Callable[[np.ndarray], np.ndarray]):
    return lambda t, s: u(t, s) if t == s else noise(u(t, s))


def _reconstruction_error(
    h: Callable[[float], np.ndarray],
    eps: float,
    noise: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    samples = int(round(0.2 / eps)) + 1
    path = straight_path(0.0, 0.2, samples)
    step = midpoint_propagator(h)
    if noise is not None:
        step = _noisy_propagator(step, noise)
    u = evolution_transport(step, identity_trivialization(4), path)
    s = float(path.times[samples // 2])
    rebuilt = hamiltonian_from_transport(u, s, eps=eps)
    gamma = connection_from_transport(u, s, eps)
    return max(float(np.max(np.abs(rebuilt - h(s)))), float(np.max(np.abs(gamma - 1j * rebuilt))))


@register("bundle.hamiltonian_bijection")
def _bijection(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    h0, h1 = _random_hermitian(rng, 4, 0.5), _random_hermitian(rng, 4, 0.5)
    noise = (lambda m: ctx.inject(m, rng)) if ctx.perturb > 0.0 else None
    const = _reconstruction_error(lambda t: h0, 1e-3, noise)
    linear = _reconstruction_error(lambda t: h0 + t * h1, 1e-3, noise)
    worst = max(const, linear)
    return CheckResult.below("bundle.hamiltonian_bijection", worst, ctx.tol(1e-6), "step 1e-3, d=4")


@register("bundle.hamiltonian_order")
def _bijection_order(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    h0 = _random_hermitian(rng, 4, 1.0)
    steps = (4e-3, 2e-3, 1e-3)
    errors = [_reconstruction_error(lambda t: h0, eps) for eps in steps]
    slope = loglog_slope(steps, errors)
    return CheckResult.within("bundle.hamiltonian_order", slope, 2.0, 0.1 * ctx.tolerance_scale)


def bundle_derivation_residuals(
    rng: np.random.Generator,
    eps_values: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5),
    noise: float = 0.0,
) -> list[float]:
    """|D_s Psi| for a lifted Schrodinger solution along a straight path at several steps.

    noise > 0 adds complex Gaussian noise of that size to the sampled solution.
    """
    d = 4
    h0, h1 = _random_hermitian(rng, d), _random_hermitian(rng, d)

    def h(t: float) -> np.ndarray:
        return h0 + t * h1

    path = PathSpec(lambda t: np.array([t]), 0.0, 1.0, 101)
    l = random_smooth_trivialization(d, 1, seed=int(rng.integers(0, 2**31)))
    psi0 = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi0 /= np.linalg.norm(psi0)

    oracle = midpoint_propagator(h, max_step=1e-4)
    states = [psi0]
    for a, b in zip(path.times[:-1], path.times[1:]):
        states.append(oracle(b, a) @ states[-1])
    if noise > 0.0:
        states = [p + noise * (rng.standard_normal(d) + 1j * rng.standard_normal(d)) for p in states]
    section = SectionAlongPath.lifted(path, l, states)
    u = evolution_transport(frozen_propagator(h), l, path)
    s = float(path.times[50])
    return [float(np.linalg.norm(path_derivation(section, u, s, eps))) for eps in eps_values]


@register("bundle.derivation_slope")
def _derivation_slope(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    eps_values = (1e-2, 1e-3, 1e-4, 1e-5)
    residuals = bundle_derivation_residuals(rng, eps_values, noise=ctx.perturb)
    slope = loglog_slope(eps_values, residuals)
    return CheckResult.within("bundle.derivation_slope", slope, 1.0, 0.1 * ctx.tolerance_scale)


# --- evolution ---------------------------------------------------------------


@register("evolution.midpoint_order")
def _midpoint_order(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    h0, h1 = _random_hermitian(rng, 4), _random_hermitian(rng, 4)

    def h(t: float) -> np.ndarray:
        return h0 + t * h1

    psi0 = np.eye(4, dtype=complex)[0]
    reference, _ = time_ordered_evolve(h, psi0, 0.0, 1.0, 2560)
    steps = (10, 20, 40)
    errors = [float(np.linalg.norm(time_ordered_evolve(h, psi0, 0.0, 1.0, n)[0] - reference)) for n in steps]
    slope = loglog_slope([1.0 / n for n in steps], errors)
    return CheckResult.within("evolution.midpoint_order", slope, 2.0, 0.1 * ctx.tolerance_scale)


@register("evolution.unitarity")
def _unitarity(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    h0, h1 = _random_hermitian(rng, 4), _random_hermitian(rng, 4)
    _, u = time_ordered_evolve(lambda t: h0 + t * h1, np.ones(4), 0.0, 1.0, 100)
    return CheckResult.below("evolution.unitarity", unitarity_residual(ctx.inject(u, rng)), ctx.tol(1e-10))


@register("evolution.kg_round_trip")
def _kg_round_trip(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    phi = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    phi_dot = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    state = kg_first_order(phi, phi_dot, 1.0, 0.1)
    state = state.with_flat(ctx.inject(state.flat(), rng))
    back_phi, back_dot = kg_from_first_order(state, 1.0)
    residual = max(float(np.max(np.abs(back_phi - phi))), float(np.max(np.abs(back_dot - phi_dot))))
    return CheckResult.below("evolution.kg_round_trip", residual, ctx.tol(1e-14))


def kg_leapfrog_differences(
    dts: tuple[float, ...],
    n: int = 64,
    dx: float = 0.2,
    t_final: float = 0.5,
    noise: Callable[[np.ndarray], np.ndarray] | None = None,
) -> list[float]:
    """max |phi_exact - phi_leapfrog| at t_final for each dt, same 3-point Laplacian.

    noise, if given, is applied to the leapfrog's initial phi.
    """
    lattice = LatticeConfig(n=n, dx=dx)
    initial = InitialConfig(kind="gaussian", width=1.0, k=1.0)
    out = []
    for dt in dts:
        steps = int(round(t_final / dt))
        cfg = EvolutionConfig(dt=dt, steps=steps, m=1.0)
        state = initial_state(lattice, initial, "kg", cfg)
        phi0, dot0 = kg_from_first_order(state, cfg.m)
        exact, _ = kg_from_first_order(kg_evolve(state, cfg, record_every=steps).final, cfg.m)
        start = phi0 if noise is None else noise(phi0)
        leap, _ = kg_leapfrog(start, dot0, cfg.m, dx, dt, steps)
        out.append(float(np.max(np.abs(exact - leap))))
    return out


@register("evolution.kg_leapfrog_order")
def _kg_order(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    dts = (2e-3, 1e-3, 5e-4)
    noise = (lambda phi: ctx.inject(phi, rng)) if ctx.perturb > 0.0 else None
    diffs = kg_leapfrog_differences(dts, noise=noise)
    slope = loglog_slope(dts, diffs)
    return CheckResult.within("evolution.kg_leapfrog_order", slope, 2.0, 0.1 * ctx.tolerance_scale)


def _free_dirac(m: float, steps: int = 1000) -> tuple[LatticeState, LatticeState, MatrixRep]:
    rep = dirac_gammas("mostly-minus", 2)
    lattice = LatticeConfig(n=128, dx=0.1)
    state = initial_state(lattice, InitialConfig(kind="gaussian", width=1.0, k=2.0), "dirac1p1", rep=rep)
    cfg = EvolutionConfig(dt=0.01, steps=steps, m=m)
    return state, dirac_evolve_1p1(state, cfg, rep, record_every=steps).final, rep


@register("evolution.dirac_norm")
def _dirac_norm(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    start, end, _ = _free_dirac(0.0)
    end = end.with_flat(ctx.inject(end.flat(), rng))
    drift = abs(end.norm() - start.norm())
    return CheckResult.below("evolution.dirac_norm", drift, ctx.tol(1e-8), "1000 steps")


@register("evolution.momentum_hermiticity")
def _momentum_hermiticity(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = dirac_gammas("mostly-minus", 2)
    p = ctx.inject(momentum_operator(64, 0.1, rep), rng)
    return CheckResult.below("evolution.momentum_hermiticity", dirac_hermiticity_residual(p, rep), ctx.tol(1e-12))


@register("evolution.momentum_conservation")
def _momentum_conservation(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    start, end, rep = _free_dirac(0.0, steps=200)
    end = end.with_flat(ctx.inject(end.flat(), rng))
    p = momentum_operator(start.n, start.dx, rep)
    drift = abs(expectation_momentum(end, p, rep) - expectation_momentum(start, p, rep))
    massive_start, massive_end, _ = _free_dirac(1.0, steps=200)
    massive_end = massive_end.with_flat(ctx.inject(massive_end.flat(), rng))
    drift_gamma1 = abs(momentum_density_expectation(massive_end) - momentum_density_expectation(massive_start))
    worst = max(drift, drift_gamma1)
    return CheckResult.below(
        "evolution.momentum_conservation", worst, ctx.tol(1e-8), f"dirac={drift:.2e} gamma1_m1={drift_gamma1:.2e}"
    )


@register("evolution.stress_energy_trace")
def _stress_trace(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = ctx.rep(dirac_gammas("mostly-minus", 4), rng)
    contracted = stress_energy_contract(np.linalg.inv(rep.metric.real), rep)
    return CheckResult.below("evolution.stress_energy_trace", np.max(np.abs(contracted - 4.0 * np.eye(4))), ctx.tol(1e-12))


@register("evolution.stress_energy_boost")
def _stress_boost(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = dirac_gammas("mostly-minus", 4)
    s = spin_boost(rep, 1, 0.1)
    lam = lorentz_from_spinor(rep, s)
    t = rng.standard_normal((4, 4))
    t = t + t.T
    moved = np.linalg.inv(s) @ stress_energy_contract(lam @ t @ lam.T, rep) @ s
    residual = float(np.max(np.abs(ctx.inject(moved, rng) - stress_energy_contract(t, rep))))
    return CheckResult.below("evolution.stress_energy_boost", residual, ctx.tol(1e-8), "rapidity 0.1")


@register("evolution.spin_vector_equivariance")
def _spin_vector(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    rep = dirac_gammas("mostly-minus", 4)
    d = 3
    h = _random_hermitian(rng, d)
    ps = [_random_hermitian(rng, d) for _ in range(3)]
    l = np.eye(d) + 0.3 * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / d
    l_inv = np.linalg.inv(l)
    first = spin_vector_assemble(h, ps, rep).conjugated(l).aggregate
    second = spin_vector_assemble(l_inv @ h @ l, [l_inv @ p @ l for p in ps], rep).aggregate
    residual = float(np.max(np.abs(ctx.inject(first, rng) - second)))
    return CheckResult.below("evolution.spin_vector_equivariance", residual, ctx.tol(1e-12))


@register("evolution.trivialization_invariance")
def _trivialization_invariance(ctx: VerifyContext, rng: np.random.Generator) -> CheckResult:
    base = {
        "engine": "dirac1p1",
        "lattice": {"n": 32, "dx": 0.2},
        "cfg": {"dt": 0.01, "steps": 20, "m": 0.5},
        "initial": {"kind": "gaussian", "width": 0.8, "k": 1.0},
    }
    plain = run_experiment(ExperimentConfig.model_validate({**base, "trivialization": "identity"}))
    seed = int(rng.integers(0, 1000))
    initial = {**base["initial"], "amplitude": 1.0 + ctx.perturb}
    lifted = run_experiment(
        ExperimentConfig.model_validate(
            {**base, "initial": initial, "trivialization": f"random_smooth:{{{seed}, 0.3}}"}
        )
    )
    residual = max(
        float(np.max(np.abs(plain.norms - lifted.norms))),
        float(np.max(np.abs(plain.expectation_p - lifted.expectation_p))),
    )
    return CheckResult.below("evolution.trivialization_invariance", residual, ctx.tol(1e-10))


# --- runner ------------------------------------------------------------------


def check_names(suite: str) -> list[str]:
    if suite == "all":
        return sorted(REGISTRY)
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    return sorted(name for name in REGISTRY if name.split(".", 1)[0] == suite)


def check_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64([seed, zlib.crc32(name.encode("utf-8"))]))


def _run_one(ctx: VerifyContext, name: str) -> CheckResult:
    try:
        return REGISTRY[name](ctx, check_rng(ctx.seed, name))
    except Exception as exc:  # a crashing check is a failing check
        logger.error(f"check={name} raised {type(exc).__name__}: {exc}")
        return CheckResult(name, float("nan"), 0.0, False, f"{type(exc).__name__}: {exc}")


def run_suite(
    suite: str,
    seed: int = 0,
    tolerance_scale: float = 1.0,
    perturb: float = 0.0,
    workers: int | None = None,
) -> VerificationReport:
    names = check_names(suite)
    ctx = VerifyContext(seed=seed, tolerance_scale=tolerance_scale, perturb=perturb)
    started = time.perf_counter()
    with ThreadPoolExecutor(max_workers=workers or thread_cap()) as pool:
        results = list(pool.map(partial(_run_one, ctx), names))
    report = VerificationReport(
        suite=suite,
        seed=seed,
        checks=results,
        tolerance_scale=tolerance_scale,
        perturb=perturb,
        wall_time=time.perf_counter() - started,
    )
    failed = report.failed
    logger.info(f"suite={suite} seed={seed} checks={len(results)} failed={len(failed)}")
    for check in failed:
        logger.warning(f"check failed name={check.name} value={check.value:.3e} tolerance={check.tolerance:.1e}")
    return report
