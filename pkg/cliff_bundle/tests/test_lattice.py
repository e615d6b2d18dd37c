import numpy as np
import pytest

from app.core.errors import GhostDataError
from app.core.linalg import loglog_slope
from app.geometry.frames import frame_rep_for
from app.geometry.lattice import (
    LatticeField,
    curved_dirac_apply,
    curved_dirac_field,
    dalembert_discretization_error,
    dalembert_factorization_check,
    vector_geometric_derivative,
)
from app.geometry.metrics import frw_1p1, minkowski, polar_flat_2d


def _frw_wave(p: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * p[..., 0] + 0.5) * np.cos(p[..., 1])


def test_for_box_layout():
    field = LatticeField.for_box(lambda p: p[..., 0] + 10.0 * p[..., 1], (0.0, 0.0), (1.0, 2.0), (4, 8), vectorized=True)
    assert field.shape == (8, 12)
    assert field.spacing == (0.25, 0.25)
    assert np.allclose(field.coordinates((2, 2)), [0.0, 0.0])
    assert field.data[3, 2] == pytest.approx(0.25)


def test_field_save_load(tmp_path):
    field = LatticeField.for_box(lambda p: np.array([p[0], 1j * p[1]]), (0.0, 0.0), (1.0, 1.0), (3, 3))
    field.save(tmp_path / "psi.bin")
    back = LatticeField.load(tmp_path / "psi.bin")
    assert np.array_equal(back.data, field.data)
    assert back.spacing == pytest.approx(field.spacing)
    assert back.ghost == field.ghost


def test_dirac_of_constant_field_vanishes():
    field = LatticeField.for_box(lambda p: np.array([1.0, 2.0]), (0.0, 0.0), (1.0, 1.0), (4, 4))
    assert np.allclose(curved_dirac_apply(field, minkowski(2), (3, 3)), 0.0)


def test_dirac_of_plane_wave_in_flat_chart():
    metric = minkowski(2)
    rep = frame_rep_for(metric)
    u = np.array([1.0, 0.5])
    k = np.array([0.7, -1.3])
    n = 64
    field = LatticeField.for_box(
        lambda p: np.exp(1j * (p[..., 0] * k[0] + p[..., 1] * k[1]))[..., None] * u,
        (0.0, 0.0), (1.0, 1.0), (n, n), vectorized=True,
    )
    idx = (n // 2, n // 2)
    psi = field.data[idx]
    upper = np.einsum("ab,bij->aij", np.diag(metric.eta), rep.gammas)
    symbol = 1j * (k[0] * upper[0] + k[1] * upper[1]) @ psi
    assert np.allclose(curved_dirac_apply(field, metric, idx), symbol, atol=5e-4)


def test_dirac_without_ghost_data():
    field = LatticeField.for_box(lambda p: np.array([1.0, 0.0]), (0.0, 0.0), (1.0, 1.0), (4, 4))
    with pytest.raises(GhostDataError):
        curved_dirac_apply(field, minkowski(2), (0, 3))


def test_polar_chart_agrees_with_cartesian_pull_back():
    """A constant spinor in the Cartesian frame reads as a rotating spinor in the polar frame."""
    polar = polar_flat_2d()
    rep = frame_rep_for(polar)
    chi = np.array([1.0, 0.3j])

    def polar_spinor(p: np.ndarray) -> np.ndarray:
        # exp(theta/2 gamma_0 gamma_1) chi, since (gamma_0 gamma_1)^2 = -1
        theta = p[1]
        rotation = np.cos(theta / 2.0) * np.eye(2) + np.sin(theta / 2.0) * (rep.gammas[0] @ rep.gammas[1])
        return rotation @ chi

    field = LatticeField.for_box(polar_spinor, (1.0, 0.0), (2.0, 1.0), (40, 40))
    worst = max(np.max(np.abs(curved_dirac_apply(field, polar, idx))) for idx in [(10, 10), (20, 25), (30, 15)])
    # a covariantly constant spinor field has D psi = 0 up to the stencil error
    assert worst < 1e-3


def test_dirac_field_runs_on_every_interior_point():
    field = LatticeField.for_box(lambda p: np.array([1.0, -1.0]), (0.0, 0.0), (1.0, 1.0), (3, 5))
    out = curved_dirac_field(field, minkowski(2), workers=2)
    assert out.shape == (3, 5, 2)
    assert np.allclose(out, 0.0)


def test_dalembert_exact_on_quadratics():
    field = LatticeField.for_box(
        lambda p: 1.0 + p[..., 0] ** 2 - 3.0 * p[..., 0] * p[..., 1] + 0.5 * p[..., 1] ** 2,
        (0.0, 0.0), (1.0, 1.0), (8, 8), vectorized=True,
    )
    residual, lhs, _ = dalembert_factorization_check(field, minkowski(2), return_fields=True)
    assert residual < 1e-10
    # box phi = d_t^2 - d_x^2 in mostly-minus
    assert np.allclose(lhs, 2.0 - 1.0, atol=1e-10)


def _frw_wave_box(p: np.ndarray, epsilon: float = 0.1) -> np.ndarray:
    # -phi_tt - (a'/a) phi_t + phi_xx / a^2 with a = 1 + epsilon t
    a = 1.0 + epsilon * p[..., 0]
    s, c = np.sin(2.0 * p[..., 0] + 0.5), np.cos(2.0 * p[..., 0] + 0.5)
    return (4.0 * s - 2.0 * epsilon / a * c - s / (a * a)) * np.cos(p[..., 1])


def test_dalembert_sides_converge_at_second_order():
    metric = frw_1p1(0.1)
    sizes = (64, 128, 256)
    factorized, flux = [], []
    for n in sizes:
        field = LatticeField.for_box(_frw_wave, (0.0, 0.0), (1.0, 1.0), (n, n), vectorized=True)
        agreement, lhs_error, rhs_error = dalembert_discretization_error(field, metric, _frw_wave_box)
        assert agreement < 1e-8
        factorized.append(lhs_error)
        flux.append(rhs_error)
    steps = [1.0 / n for n in sizes]
    assert loglog_slope(steps, factorized) >= 1.9
    assert loglog_slope(steps, flux) >= 1.9
    assert factorized[-1] < 1e-3


def test_dalembert_order_sees_noisy_field(rng):
    metric = frw_1p1(0.1)
    errors = []
    for n in (32, 64):
        field = LatticeField.for_box(_frw_wave, (0.0, 0.0), (1.0, 1.0), (n, n), vectorized=True)
        noisy = LatticeField(field.data + 1e-3 * rng.standard_normal(field.data.shape), field.spacing, field.origin)
        errors.append(dalembert_discretization_error(noisy, metric, _frw_wave_box)[1])
    # the noise is amplified by 1 / h^2, so refinement makes things worse
    assert errors[1] > errors[0]


def test_dalembert_needs_ghost_layers():
    field = LatticeField.for_box(_frw_wave, (0.0, 0.0), (1.0, 1.0), (4, 4), ghost=1, vectorized=True)
    with pytest.raises(GhostDataError):
        dalembert_factorization_check(field, frw_1p1(0.1))


def test_gradient_field_is_curl_free():
    field = LatticeField.for_box(
        lambda p: np.array([2.0 * p[0], -2.0 * p[1]]), (0.0, 0.0), (1.0, 1.0), (6, 6)
    )
    derivative = vector_geometric_derivative(field, minkowski(2))
    assert np.allclose(derivative.curl, 0.0, atol=1e-12)
    # g^{mu nu} d_mu v_nu = 2 + (-1)(-2)
    assert np.allclose(derivative.divergence, 4.0, atol=1e-12)
