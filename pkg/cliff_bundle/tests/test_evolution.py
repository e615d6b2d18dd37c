import numpy as np
import pytest

from app.algebra.gamma_repr import dirac_gammas
from app.core.errors import (
    BoundaryError,
    ConfigError,
    DimensionMismatchError,
    MassError,
    NonHermitianError,
    StabilityError,
)
from app.core.linalg import expm, hermiticity_residual, loglog_slope, unitarity_residual
from app.core.models import EvolutionConfig, ExperimentConfig, InitialConfig, LatticeConfig
from app.evolution.dirac import (
    chart_factors,
    chiral_spinor,
    curved_dirac_hamiltonian,
    dirac_evolve_1p1,
    dirac_hamiltonian,
    dirac_matrices,
)
from app.evolution.experiment import initial_state, run_experiment, schrodinger_evolve, schrodinger_hamiltonian
from app.evolution.klein_gordon import (
    TAU_3,
    kg_evolve,
    kg_first_order,
    kg_from_first_order,
    kg_hamiltonian,
    kg_leapfrog,
    kinetic_operator,
)
from app.evolution.operators import momentum_operator, momentum_rep
from app.evolution.propagators import (
    LatticeState,
    check_stability,
    evolve_static,
    time_ordered_evolve,
)
from app.geometry.metrics import frw_1p1, minkowski, rindler_1p1
from app.verify.suites import kg_leapfrog_differences


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (a + a.conj().T)
    return h / np.linalg.norm(h, 2)


def _experiment(**overrides) -> ExperimentConfig:
    base = {
        "engine": "dirac1p1",
        "lattice": {"n": 32, "dx": 0.2},
        "cfg": {"dt": 0.01, "steps": 20, "m": 0.5},
        "initial": {"kind": "gaussian", "width": 0.8, "k": 1.0},
    }
    base.update(overrides)
    return ExperimentConfig.model_validate(base)


# --- time-ordered propagation -------------------------------------------------


def test_zero_hamiltonian_keeps_state():
    psi0 = np.array([0.6, 0.8j])
    psi, u = time_ordered_evolve(lambda t: np.zeros((2, 2)), psi0, 0.0, 1.0, 10)
    assert np.allclose(psi, psi0)
    assert np.allclose(u, np.eye(2))


def test_constant_hamiltonian_is_exact(rng):
    h = _random_hermitian(rng, 3)
    psi0 = np.array([1.0, 0.0, 0.0], dtype=complex)
    psi, _ = time_ordered_evolve(lambda t: h, psi0, 0.0, 0.7, 7, hbar=0.5)
    assert np.allclose(psi, expm(-1j * 0.7 / 0.5 * h) @ psi0, atol=1e-12)


def test_midpoint_rule_is_second_order(rng):
    h0, h1 = _random_hermitian(rng, 4), _random_hermitian(rng, 4)

    def h(t: float) -> np.ndarray:
        return h0 + t * h1

    psi0 = np.eye(4, dtype=complex)[0]
    reference, u = time_ordered_evolve(h, psi0, 0.0, 1.0, 2560)
    assert unitarity_residual(u) < 1e-10
    steps = (10, 20, 40)
    errors = [np.linalg.norm(time_ordered_evolve(h, psi0, 0.0, 1.0, n)[0] - reference) for n in steps]
    assert loglog_slope([1.0 / n for n in steps], errors) == pytest.approx(2.0, abs=0.1)


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianError):
        time_ordered_evolve(lambda t: np.array([[0.0, 1.0], [0.0, 0.0]]), np.ones(2), 0.0, 1.0, 2)


def test_stability_guard_suggests_step():
    h = np.diag([10.0, -10.0])
    assert check_stability(h, 0.01) == pytest.approx(0.1)
    with pytest.raises(StabilityError) as info:
        check_stability(h, 0.1)
    assert info.value.suggested_dt == pytest.approx(0.45 / 10.0)


def test_lattice_state_rejects_open_boundary():
    with pytest.raises(BoundaryError):
        LatticeState(np.zeros((4, 2)), 0.1, boundary="dirichlet")


def test_evolve_static_records_requested_steps():
    state = LatticeState(np.ones((3, 1)), 1.0)
    traj = evolve_static(np.zeros((3, 3)), state, 0.1, 10, record_every=4)
    assert np.allclose(traj.times, [0.0, 0.4, 0.8, 1.0])
    assert np.allclose(traj.norms(), 3.0)


# --- dirac -------------------------------------------------------------------


def test_dirac_alpha_beta():
    alpha, beta = dirac_matrices()
    assert np.allclose(alpha @ alpha, np.eye(2))
    assert np.allclose(alpha @ beta + beta @ alpha, 0.0)


def test_dirac_hamiltonian_is_hermitian():
    cfg = EvolutionConfig(m=1.0, e=0.5, a0=[0.1 * i for i in range(16)], a1=[0.2] * 16)
    assert hermiticity_residual(dirac_hamiltonian(16, 0.1, cfg)) < 1e-12


def test_free_dirac_norm_is_conserved():
    rep = dirac_gammas("mostly-minus", 2)
    state = initial_state(LatticeConfig(n=128, dx=0.1), InitialConfig(kind="gaussian", width=1.0, k=2.0), rep=rep)
    traj = dirac_evolve_1p1(state, EvolutionConfig(dt=0.01, steps=1000, m=0.0), rep, record_every=1000)
    assert abs(traj.final.norm() - state.norm()) < 1e-8


def test_massless_right_mover_translates():
    lattice = LatticeConfig(n=128, dx=0.1)
    state = initial_state(lattice, InitialConfig(kind="gaussian", center=4.0, width=1.0, k=0.0, chirality="right"))
    traj = dirac_evolve_1p1(state, EvolutionConfig(dt=0.01, steps=200, m=0.0), record_every=200)
    density = np.sum(np.abs(traj.final.data) ** 2, axis=1)
    centre = np.sum(state.coordinates * density) / np.sum(density)
    assert centre == pytest.approx(6.0, abs=0.1)


def test_chiral_spinors_are_alpha_eigenvectors():
    alpha, _ = dirac_matrices()
    right, left = chiral_spinor("right"), chiral_spinor("left")
    assert np.allclose(alpha @ right, right)
    assert np.allclose(alpha @ left, -left)
    assert np.allclose(chiral_spinor("none"), [1.0, 0.0])


def test_dirac_needs_two_components():
    with pytest.raises(DimensionMismatchError):
        dirac_evolve_1p1(LatticeState(np.ones((4, 1)), 0.1), EvolutionConfig())


def test_dirac_rest_state_picks_up_mass_phase():
    lattice = LatticeConfig(n=8, dx=0.5)
    cfg = EvolutionConfig(dt=0.01, steps=50, m=0.7, hbar=0.5, c=2.0)
    state = initial_state(lattice, InitialConfig(kind="rest"))
    final = dirac_evolve_1p1(state, cfg, record_every=50).final
    # e^{-i m c^2 t / hbar} with t = 0.5
    phase = np.exp(-1j * 0.7 * 4.0 * 0.5 / 0.5)
    assert np.allclose(final.data, state.data * phase, atol=1e-12)


# --- klein-gordon ------------------------------------------------------------


def test_kg_round_trip(rng):
    phi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    phi_dot = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    back_phi, back_dot = kg_from_first_order(kg_first_order(phi, phi_dot, 2.0, 0.1, hbar=0.5, c=3.0), 2.0, 0.5, 3.0)
    assert np.allclose(back_phi, phi, atol=1e-14)
    assert np.allclose(back_dot, phi_dot, atol=1e-12)


def test_kg_needs_positive_mass():
    with pytest.raises(MassError):
        kg_first_order(np.zeros(4), np.zeros(4), 0.0, 0.1)


def test_kg_rejects_scalar_potential():
    with pytest.raises(ValueError):
        kg_hamiltonian(8, 0.1, EvolutionConfig(m=1.0, a0=[1.0] * 8))


def test_kg_hamiltonian_is_tau3_self_adjoint():
    h = kg_hamiltonian(8, 0.2, EvolutionConfig(m=1.5))
    weight = np.kron(np.eye(8), TAU_3)
    assert hermiticity_residual(weight @ h) < 1e-12


def test_kg_rest_mode_oscillates_at_mass_frequency():
    lattice = LatticeConfig(n=8, dx=0.5)
    cfg = EvolutionConfig(dt=0.01, steps=50, m=2.0)
    state = initial_state(lattice, InitialConfig(kind="rest"), "kg", cfg)
    phi0, _ = kg_from_first_order(state, cfg.m)
    phi, _ = kg_from_first_order(kg_evolve(state, cfg, record_every=50).final, cfg.m)
    assert np.allclose(phi, phi0 * np.exp(-1j * 2.0 * 0.5), atol=1e-10)


def test_kg_matches_leapfrog_at_second_order():
    dts = (2e-3, 1e-3, 5e-4)
    diffs = kg_leapfrog_differences(dts)
    assert loglog_slope(dts, diffs) == pytest.approx(2.0, abs=0.1)


def test_leapfrog_static_solution():
    phi, vel = kg_leapfrog(np.zeros(8), np.zeros(8), 1.0, 0.1, 0.01, 10)
    assert np.allclose(phi, 0.0) and np.allclose(vel, 0.0)


def test_kg_matches_leapfrog_on_a_long_run():
    # N = 256 over 500 steps
    diff = kg_leapfrog_differences((1e-3,), n=256, dx=0.2, t_final=0.5)[0]
    assert diff < 1e-5


def test_leapfrog_accepts_the_coupled_kinetic_operator():
    cfg = EvolutionConfig(m=1.0, e=1.0, a1=[0.8] * 16)
    kinetic = kinetic_operator(16, 0.2, cfg)
    phi = np.exp(1j * 2.0 * np.pi * np.arange(16) / 16)
    plain, _ = kg_leapfrog(phi, np.zeros(16), 1.0, 0.2, 0.01, 5)
    coupled, _ = kg_leapfrog(phi, np.zeros(16), 1.0, 0.2, 0.01, 5, kinetic=kinetic)
    assert not np.allclose(plain, coupled)
    with pytest.raises(DimensionMismatchError):
        kg_leapfrog(phi, np.zeros(16), 1.0, 0.2, 0.01, 5, kinetic=np.eye(4))


# --- schrodinger -------------------------------------------------------------


def test_schrodinger_plane_wave_phase():
    lattice = LatticeConfig(n=32, dx=0.25)
    cfg = EvolutionConfig(dt=0.01, steps=10, m=1.0)
    state = initial_state(lattice, InitialConfig(kind="planewave", k=2.0 * np.pi / 8.0), "schrodinger")
    k = 2.0 * np.pi / 8.0
    energy = (2.0 - 2.0 * np.cos(k * lattice.dx)) / lattice.dx**2 / 2.0
    final = schrodinger_evolve(state, cfg, record_every=10).final
    assert np.allclose(final.data[:, 0], state.data[:, 0] * np.exp(-1j * energy * 0.1), atol=1e-10)


def test_schrodinger_needs_mass():
    with pytest.raises(ValueError):
        schrodinger_hamiltonian(8, 0.1, EvolutionConfig(m=0.0))


# --- experiment runner -------------------------------------------------------


def test_experiment_series_shape():
    result = run_experiment(_experiment(outputs=["norm", "expectation_p", "trajectory"]))
    assert result.times.size == 21
    assert result.series_header() == ["t", "norm", "re_p", "im_p"]
    assert len(result.series_rows()) == 21
    assert result.trajectory_array().shape == (21, 32, 2)
    assert result.summary()["steps"] == 20
    assert "wall_time" not in result.summary()
    assert "wall_time" in result.summary(include_timing=True)


@pytest.mark.parametrize("trivialization", ["scalar:{2}", "random_smooth:{7, 0.3}"])
def test_observables_do_not_depend_on_trivialization(trivialization):
    plain = run_experiment(_experiment(trivialization="identity"))
    lifted = run_experiment(_experiment(trivialization=trivialization))
    assert np.allclose(plain.norms, lifted.norms, atol=1e-10)
    assert np.allclose(plain.expectation_p, lifted.expectation_p, atol=1e-10)


def test_cross_check_against_direct_exponential():
    result = run_experiment(_experiment(cross_check=True))
    assert "residual" in result.series_header()
    assert result.summary()["max_residual"] < 1e-10


def test_kg_cross_check_reports_leapfrog_gap():
    result = run_experiment(
        _experiment(engine="kg", cfg={"dt": 0.002, "steps": 20, "m": 1.0}, cross_check=True)
    )
    assert result.summary()["max_residual"] < 1e-3
    assert result.summary()["norm_drift"] < 1e-10


def test_unstable_step_is_refused():
    with pytest.raises(StabilityError):
        run_experiment(_experiment(cfg={"dt": 1.0, "steps": 2, "m": 0.5}))


def test_kg_cross_check_with_vector_potential():
    cfg = {"dt": 0.002, "steps": 20, "m": 1.0, "e": 1.0, "a1": [0.8] * 32}
    result = run_experiment(_experiment(engine="kg", cfg=cfg, cross_check=True))
    assert result.summary()["max_residual"] < 1e-3


# --- curved charts -----------------------------------------------------------


def _frw(epsilon: float, **overrides) -> ExperimentConfig:
    return _experiment(metric={"name": "frw_1p1", "params": {"epsilon": epsilon}}, **overrides)


def test_flat_chart_hamiltonian_matches_plain_one():
    cfg = EvolutionConfig(m=0.5, e=0.3, a0=[0.1] * 12, a1=[0.2] * 12)
    curved = curved_dirac_hamiltonian(12, 0.2, cfg, minkowski(2, "mostly-plus"))
    assert np.allclose(curved, dirac_hamiltonian(12, 0.2, cfg), atol=1e-14)


def test_rindler_hamiltonian_scales_with_lapse():
    metric = rindler_1p1(0.5)
    lapse, scale = chart_factors(metric, 8, 0.25)
    assert np.allclose(lapse, 1.0 + 0.5 * 0.25 * np.arange(8))
    assert np.allclose(scale, 1.0)
    h = curved_dirac_hamiltonian(8, 0.25, EvolutionConfig(m=1.0), metric)
    assert hermiticity_residual(h) < 1e-12
    _, beta = dirac_matrices()
    assert np.allclose(np.diagonal(h)[::2], lapse * beta[0, 0])


def test_frw_momentum_is_read_at_the_recorded_time():
    config = _frw(0.5, cfg={"dt": 0.01, "steps": 100, "m": 0.5}, outputs=["norm", "expectation_p", "trajectory"])
    result = run_experiment(config)
    metric = frw_1p1(0.5)
    rep = momentum_rep(dirac_gammas("mostly-minus", 2), metric)
    a = 1.5  # a(t) at t = 1
    psi = result.states[-1].reshape(-1) / np.sqrt(a)
    weight = np.kron(np.eye(32), rep.gammas[0])

    def read(p: np.ndarray) -> complex:
        return complex(np.vdot(psi, a * (weight @ p @ psi)) * 0.2)

    now = read(momentum_operator(32, 0.2, rep, metric=metric, time=1.0))
    then = read(momentum_operator(32, 0.2, rep, metric=metric, time=0.0))
    assert result.expectation_p[-1] == pytest.approx(now, abs=1e-12)
    assert abs(now - then) > 1e-3
    # the density-weighted charge is conserved by the time-dependent steps
    assert result.summary()["norm_drift"] < 1e-10


def test_expanding_chart_slows_massless_packet():
    lattice = {"n": 64, "dx": 0.2}
    initial = {"kind": "gaussian", "center": 4.0, "width": 1.0, "k": 0.0, "chirality": "right"}
    cfg = {"dt": 0.02, "steps": 100, "m": 0.0}
    result = run_experiment(_frw(0.5, lattice=lattice, initial=initial, cfg=cfg, outputs=["norm", "trajectory"]))
    density = np.sum(np.abs(result.states[-1]) ** 2, axis=1)
    x = 0.2 * np.arange(64)
    centre = np.sum(x * density) / np.sum(density)
    # dx/dt = 1/a(t): travelled ln(1 + 0.5 * 2) / 0.5
    assert centre == pytest.approx(4.0 + np.log(2.0) / 0.5, abs=0.1)


def test_time_dependent_chart_cross_check():
    result = run_experiment(_frw(0.5, cross_check=True))
    # one midpoint step against four
    assert result.summary()["max_residual"] < 1e-4


def test_static_chart_cross_check_is_exact():
    metric = {"name": "rindler_1p1", "params": {"acceleration": 0.1}}
    result = run_experiment(_experiment(metric=metric, cross_check=True))
    assert result.summary()["max_residual"] < 1e-10
    assert result.summary()["norm_drift"] < 1e-10


@pytest.mark.parametrize(
    "metric, match",
    [
        ({"name": "polar_flat_2d"}, "Lorentzian"),
        ({"name": "minkowski", "dim": 4}, "Lorentzian"),
        ({"name": "frw_1p1", "params": {"epsilon": -1.0}}, "singular"),
        ({"name": "rindler_1p1", "params": {"acceleration": -1.0}}, "singular"),
        ({"name": "tilted", "kind": "table", "params": {"g": [[-1.0, 0.2], [0.2, 1.0]]}}, "diagonal"),
    ],
)
def test_unusable_chart_is_a_config_error(metric, match):
    # frw reaches a = 0 at t = 1; rindler's lapse vanishes at x = 1
    config = _experiment(metric=metric, cfg={"dt": 0.01, "steps": 150, "m": 0.5})
    with pytest.raises(ConfigError, match=match):
        run_experiment(config)
