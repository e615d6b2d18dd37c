import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.algebra.gamma_repr import (
    MatrixRep,
    SpinorRotation,
    dirac_gammas,
    dual_gammas,
    gamma_five,
    gammas_for_metric,
    lorentz_from_spinor,
    minkowski_eta,
    normalize_convention,
    random_sl2c,
    rep_from_json,
    rep_to_json,
    sl2c_embed,
    spin_boost,
    spin_rotate,
    spin_transition,
    time_axes,
)
from app.core.errors import CliffordRelationError, DeterminantError, DimensionMismatchError, PlaneError


angles = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@pytest.mark.parametrize("dim", [2, 4])
def test_mostly_minus_squares(dim):
    rep = dirac_gammas("mostly-minus", dim)
    g0, g1 = rep.gammas[0], rep.gammas[1]
    assert np.allclose(g0 @ g0 + g0 @ g0, 2.0 * np.eye(dim))
    assert np.allclose(g1 @ g1 + g1 @ g1, -2.0 * np.eye(dim))
    assert rep.relation_residual() < 1e-12


@pytest.mark.parametrize("dim", [2, 4])
def test_mostly_plus_flips_signs(dim):
    rep = dirac_gammas("mp", dim)
    g0 = rep.gammas[0]
    assert np.allclose(2.0 * g0 @ g0, -2.0 * np.eye(dim))
    assert np.allclose(np.diag(rep.metric), np.diag(minkowski_eta(dim, "mostly-plus")))


def test_two_dimensional_set_gives_pauli_alpha_beta():
    rep = dirac_gammas("mostly-minus", 2)
    sigma_x = np.array([[0, 1], [1, 0]])
    sigma_z = np.array([[1, 0], [0, -1]])
    assert np.allclose(rep.gammas[0], sigma_z)
    assert np.allclose(rep.gammas[0] @ rep.gammas[1], sigma_x)


def test_unknown_convention():
    with pytest.raises(ValueError):
        normalize_convention("euclid")
    with pytest.raises(DimensionMismatchError):
        dirac_gammas("mm", 3)


def test_verify_rejects_broken_relations(rng):
    rep = dirac_gammas("mostly-minus", 4).perturbed(1e-3, rng)
    with pytest.raises(CliffordRelationError):
        rep.verify()


def test_contraction_gives_dimension():
    rep = dirac_gammas("mostly-minus", 4)
    upper = dual_gammas(rep).gammas
    total = sum(upper[mu] @ rep.gammas[mu] for mu in range(4))
    assert np.allclose(total, 4.0 * np.eye(4), atol=1e-12)


def test_dual_with_scaled_metric():
    rep = dirac_gammas("mostly-minus", 4)
    raised = dual_gammas(rep, 2.0 * rep.metric).gammas
    expected = dual_gammas(rep).gammas / 2.0
    assert np.allclose(raised, expected, atol=1e-14)


def test_dual_rejects_wrong_metric_shape():
    with pytest.raises(DimensionMismatchError):
        dual_gammas(dirac_gammas("mostly-minus", 4), np.eye(3))


def test_chirality_matrix():
    rep = dirac_gammas("mostly-minus", 4)
    g5 = gamma_five(rep)
    assert np.allclose(g5 @ g5, np.eye(4))
    for g in rep.gammas:
        assert np.allclose(g5 @ g, -g @ g5)


def test_double_cover():
    rep = dirac_gammas("mostly-minus", 4)
    assert np.allclose(spin_rotate(rep, (1, 2), 0.0), np.eye(4))
    assert np.allclose(spin_rotate(rep, (1, 2), 2.0 * np.pi), -np.eye(4), atol=1e-10)
    assert np.allclose(spin_rotate(rep, (1, 2), 4.0 * np.pi), np.eye(4), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(angles, angles)
def test_rotations_compose_additively(a, b):
    rep = dirac_gammas("mostly-minus", 4)
    combined = spin_rotate(rep, (2, 3), a) @ spin_rotate(rep, (2, 3), b)
    assert np.allclose(combined, spin_rotate(rep, (2, 3), a + b), atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(angles)
def test_rotation_has_unit_determinant(theta):
    rotation = SpinorRotation.build(dirac_gammas("mostly-minus", 4), (1, 3), theta)
    assert rotation.determinant_residual() < 1e-10


def test_degenerate_plane():
    rep = dirac_gammas("mostly-minus", 4)
    with pytest.raises(PlaneError):
        spin_rotate(rep, (1, 1), 0.3)
    with pytest.raises(PlaneError):
        spin_rotate(rep, (0, 4), 0.3)
    with pytest.raises(PlaneError):
        spin_boost(rep, 0, 0.3)


@pytest.mark.parametrize("convention", ["mostly-minus", "mostly-plus"])
@pytest.mark.parametrize("dim, plane", [(4, (0, 1)), (4, (3, 0)), (2, (0, 1))])
def test_rotation_plane_must_be_spatial(convention, dim, plane):
    rep = dirac_gammas(convention, dim)
    assert time_axes(rep) == (0,)
    with pytest.raises(PlaneError, match="time axis"):
        spin_rotate(rep, plane, 0.3)
    # the same plane is a boost
    assert np.allclose(np.linalg.det(spin_boost(rep, plane[1] or plane[0], 0.3)), 1.0)


def test_euclidean_rep_rotates_in_every_plane():
    rep = gammas_for_metric([1.0, 1.0, 1.0])
    assert time_axes(rep) == ()
    assert np.allclose(spin_rotate(rep, (0, 1), 2.0 * np.pi), -np.eye(rep.size), atol=1e-10)


def test_rotation_induces_orthogonal_lorentz_map():
    rep = dirac_gammas("mostly-minus", 4)
    lam = lorentz_from_spinor(rep, spin_rotate(rep, (1, 2), 0.7))
    eta = rep.metric
    assert np.allclose(lam.T @ eta @ lam, eta, atol=1e-10)
    assert lam[0, 0] == pytest.approx(1.0)
    assert lam[3, 3] == pytest.approx(1.0)


def test_boost_is_lorentz():
    rep = dirac_gammas("mostly-minus", 4)
    lam = lorentz_from_spinor(rep, spin_boost(rep, 1, 0.4))
    assert np.allclose(lam.T @ rep.metric @ lam, rep.metric, atol=1e-10)
    assert abs(lam[0, 0]) == pytest.approx(np.cosh(0.4))


def test_sl2c_identity_and_homomorphism(rng):
    assert np.allclose(sl2c_embed(np.eye(2)), np.eye(4))
    for _ in range(5):
        a, b = random_sl2c(rng), random_sl2c(rng)
        assert np.allclose(sl2c_embed(a @ b), sl2c_embed(a) @ sl2c_embed(b), atol=1e-10)


def test_sl2c_block_structure():
    a = np.array([[2.0, 1.0], [1.0, 1.0]])
    rho = sl2c_embed(a)
    assert np.allclose(rho[:2, :2], a)
    assert np.allclose(rho[2:, 2:], np.linalg.inv(a.T))
    assert np.allclose(rho[:2, 2:], 0.0)


def test_sl2c_rejects_bad_input():
    with pytest.raises(DeterminantError):
        sl2c_embed(2.0 * np.eye(2))
    with pytest.raises(DimensionMismatchError):
        sl2c_embed(np.eye(3))


def test_spin_transition_cocycle(rng):
    a, b = random_sl2c(rng), random_sl2c(rng)
    rho = spin_transition(a, b, a @ b)
    assert np.allclose(rho, sl2c_embed(a))
    with pytest.raises(DeterminantError):
        spin_transition(a, b, b @ a @ random_sl2c(rng))


def test_json_form_restores_rep():
    rep = dirac_gammas("mostly-plus", 4)
    back = rep_from_json(rep_to_json(rep))
    assert isinstance(back, MatrixRep)
    assert np.allclose(back.gammas, rep.gammas)
    assert np.allclose(back.metric, rep.metric)
    assert back.convention == "mostly-plus"
