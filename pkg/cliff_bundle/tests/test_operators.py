import numpy as np
import pytest

from app.algebra.gamma_repr import dirac_gammas, dual_gammas, lorentz_from_spinor, spin_boost
from app.bundle.trivializations import random_smooth_trivialization, scalar_trivialization
from app.core.errors import BoundaryError, DimensionMismatchError
from app.core.models import EvolutionConfig, InitialConfig, LatticeConfig
from app.evolution.dirac import dirac_evolve_1p1
from app.evolution.experiment import initial_state
from app.evolution.operators import (
    bundle_stress_energy,
    dirac_hermiticity_residual,
    expectation_momentum,
    momentum_density_expectation,
    momentum_operator,
    momentum_rep,
    scalar_stress_energy,
    spin_vector_assemble,
    stress_energy_contract,
)
from app.geometry.frames import frame_gammas, spin_connection_at
from app.geometry.metrics import frw_1p1, minkowski


@pytest.fixture
def rep2():
    return dirac_gammas("mostly-minus", 2)


@pytest.fixture
def rep4():
    return dirac_gammas("mostly-minus", 4)


def _evolve(m: float, steps: int = 100):
    rep = dirac_gammas("mostly-minus", 2)
    state = initial_state(LatticeConfig(n=64, dx=0.1), InitialConfig(kind="gaussian", width=0.8, k=1.5), rep=rep)
    traj = dirac_evolve_1p1(state, EvolutionConfig(dt=0.01, steps=steps, m=m), rep, record_every=steps)
    return state, traj.final, rep


# --- momentum ----------------------------------------------------------------


def test_flat_momentum_is_dirac_self_adjoint(rep2):
    p = momentum_operator(16, 0.1, rep2)
    assert p.shape == (32, 32)
    assert dirac_hermiticity_residual(p, rep2) < 1e-12


def test_flat_momentum_on_plane_waves(rep2):
    n, dx, hbar = 16, 0.3, 0.5
    k = 2.0 * np.pi * 3 / (n * dx)
    wave = np.exp(1j * k * dx * np.arange(n))
    spinor = np.array([0.6, 0.8j])
    p = momentum_operator(n, dx, rep2, hbar=hbar)
    upper = dual_gammas(rep2).gammas[1]
    # central difference: -i hbar d_x e^{ikx} = hbar sin(k dx) / dx e^{ikx}
    expected = hbar * np.sin(k * dx) / dx * np.kron(wave, upper @ spinor)
    assert np.allclose(p @ np.kron(wave, spinor), expected, atol=1e-12)


def test_momentum_needs_periodic_lattice(rep2):
    with pytest.raises(BoundaryError):
        momentum_operator(8, 0.1, rep2, boundary="dirichlet")


def test_momentum_needs_a_1p1_chart(rep2):
    with pytest.raises(DimensionMismatchError):
        momentum_operator(8, 0.1, rep2, metric=minkowski(3))


def test_flat_chart_matches_plain_lattice(rep2):
    plain = momentum_operator(12, 0.2, rep2)
    charted = momentum_operator(12, 0.2, rep2, metric=minkowski(2))
    assert np.allclose(charted, plain, atol=1e-12)


def test_momentum_rep_follows_chart_signature(rep2):
    assert momentum_rep(rep2, None) is rep2
    assert momentum_rep(rep2, minkowski(2)) is rep2
    swapped = momentum_rep(rep2, frw_1p1(0.1))
    assert np.allclose(np.diag(swapped.metric), [-1.0, 1.0])
    assert swapped.relation_residual() < 1e-12


def test_frw_momentum_carries_spin_connection(rep2):
    metric = frw_1p1(0.1)
    n, dx = 10, 0.3
    p = momentum_operator(n, dx, rep2, metric=metric)
    rep = momentum_rep(rep2, metric)
    x = np.array([0.0, 0.0])
    upper = frame_gammas(metric, x, rep)[1][1]
    omega = spin_connection_at(metric, x, rep=rep).omega[1]
    assert np.max(np.abs(omega)) > 0.0
    # a(0) = 1, so only the connection term separates it from the flat operator
    flat = momentum_operator(n, dx, rep)
    assert np.allclose(p - flat, -1j * np.kron(np.eye(n), upper @ omega), atol=1e-10)


def test_massless_momentum_expectation_is_conserved():
    state, final, rep = _evolve(0.0)
    p = momentum_operator(state.n, state.dx, rep)
    assert abs(expectation_momentum(final, p, rep) - expectation_momentum(state, p, rep)) < 1e-9


def test_translation_generator_is_conserved_with_mass():
    state, final, _ = _evolve(0.5)
    before = momentum_density_expectation(state)
    assert abs(momentum_density_expectation(final) - before) < 1e-9
    # a boosted packet moves right
    assert before.real > 0.0


# --- spin-vectors ------------------------------------------------------------


def test_spin_vector_components(rep4, rng):
    h = np.diag([1.0, 2.0, 3.0])
    ps = [rng.standard_normal((3, 3)) for _ in range(3)]
    sv = spin_vector_assemble(h, ps, rep4)
    assert len(sv.components) == 4
    assert sv.aggregate.shape == (12, 12)
    assert np.allclose(sv.energy, np.kron(h, rep4.gammas[0]))
    upper = dual_gammas(rep4).gammas
    assert np.allclose(sv.components[2], np.kron(ps[1], upper[2]))


def test_spin_vector_shape_errors(rep4):
    h = np.eye(3)
    with pytest.raises(DimensionMismatchError):
        spin_vector_assemble(h, [h, h], rep4)
    with pytest.raises(DimensionMismatchError):
        spin_vector_assemble(h, [h, h, np.eye(2)], rep4)
    with pytest.raises(DimensionMismatchError):
        spin_vector_assemble(np.ones((3, 2)), [h, h, h], rep4)


def test_spin_vector_is_equivariant(rep4, rng):
    d = 3
    h = rng.standard_normal((d, d))
    ps = [rng.standard_normal((d, d)) for _ in range(3)]
    l = np.eye(d) + 0.2 * rng.standard_normal((d, d))
    l_inv = np.linalg.inv(l)
    first = spin_vector_assemble(h, ps, rep4).conjugated(l).aggregate
    second = spin_vector_assemble(l_inv @ h @ l, [l_inv @ p @ l for p in ps], rep4).aggregate
    assert np.allclose(first, second, atol=1e-12)


# --- stress-energy -----------------------------------------------------------


def test_inverse_metric_contracts_to_dimension(rep4):
    contracted = stress_energy_contract(np.linalg.inv(rep4.metric.real), rep4)
    assert np.allclose(contracted, 4.0 * np.eye(4), atol=1e-12)


def test_symmetric_tensor_contracts_to_scalar(rep4, rng):
    t = rng.standard_normal((4, 4))
    t = t + t.T
    expected = np.sum(t * rep4.metric.real) * np.eye(4)
    assert np.allclose(stress_energy_contract(t, rep4), expected, atol=1e-12)


def test_stress_energy_input_checks(rep4):
    with pytest.raises(DimensionMismatchError):
        stress_energy_contract(np.eye(3), rep4)
    with pytest.raises(ValueError):
        stress_energy_contract(1j * np.eye(4), rep4)


def test_stress_energy_boost_covariance(rep4, rng):
    s = spin_boost(rep4, 1, 0.1)
    lam = lorentz_from_spinor(rep4, s)
    t = rng.standard_normal((4, 4))
    t = t + t.T
    moved = np.linalg.inv(s) @ stress_energy_contract(lam @ t @ lam.T, rep4) @ s
    assert np.allclose(moved, stress_energy_contract(t, rep4), atol=1e-8)


def test_scalar_stress_energy_density():
    g = np.diag([1.0, -1.0])
    t = scalar_stress_energy(np.array([0.3, 0.4]), 2.0, 0.5, g)
    assert np.allclose(t, t.T)
    # T^00 = (phi_t^2 + phi_x^2 + m^2 phi^2) / 2
    assert t[0, 0] == pytest.approx(0.5 * (0.09 + 0.16 + 0.25 * 4.0))


def test_bundle_stress_energy_conjugates(rep2, rng):
    t = rng.standard_normal((2, 2))
    plain = stress_energy_contract(t, rep2)
    assert np.allclose(bundle_stress_energy(t, rep2, scalar_trivialization(2, 3.0), 0.4), plain)
    l = random_smooth_trivialization(2, seed=9, amplitude=0.3)
    moved = bundle_stress_energy(t, rep2, l, 0.4)
    assert np.allclose(np.sort_complex(np.linalg.eigvals(moved)), np.sort_complex(np.linalg.eigvals(plain)), atol=1e-10)
