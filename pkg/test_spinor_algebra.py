"""Tests for the primed-spinor algebra: sigma, the endomorphisms I and J, alpha-planes."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spinor_algebra as sa
from errors import TwistorError, ZeroSpinor
from forms import span_residual

component = st.complex_numbers(min_magnitude=0.0, max_magnitude=5.0, allow_nan=False, allow_infinity=False)
spinors = st.tuples(component, component).map(np.array).filter(lambda pi: np.linalg.norm(pi) > 0.1)


@given(spinors)
def test_sigma_squares_to_minus_one(pi):
    assert np.allclose(sa.sigma_apply(sa.sigma_apply(pi)), -pi, atol=1e-12)


@given(spinors)
def test_sigma_pi_identity(pi):
    assert sa.sigma_pi_identity_residual(pi) < 1e-10 * max(1.0, sa.norm_squared(pi))


@given(spinors)
@settings(max_examples=25)
def test_endo_I_eigenvectors(pi):
    M = sa.endo_I(pi)
    assert np.allclose(M @ pi, -1j * pi, atol=1e-10)
    assert np.allclose(M @ sa.sigma_apply(pi), 1j * sa.sigma_apply(pi), atol=1e-10)
    assert np.allclose(M @ M, -np.eye(2), atol=1e-10)


@given(spinors)
@settings(max_examples=25)
def test_endo_J_action(pi):
    M = sa.endo_J_complex(pi)
    assert np.allclose(M @ pi, -sa.sigma_apply(pi), atol=1e-10)
    assert np.allclose(M @ sa.sigma_apply(pi), pi, atol=1e-10)


@given(spinors)
@settings(max_examples=25)
def test_endo_I_is_scale_invariant(pi):
    assert np.allclose(sa.endo_I(pi), sa.endo_I((2.0 - 1.5j) * pi), atol=1e-10)


def test_tangent_action_squares_to_minus_one():
    pi = np.array([0.3 + 0.8j, -1.1 + 0.2j])
    T = sa.tangent_action(sa.endo_I(pi))
    assert T.shape == (4, 4)
    assert np.allclose(np.imag(T), 0.0, atol=1e-12)
    assert np.allclose(T @ T, -np.eye(4), atol=1e-10)


def test_alpha_plane_is_totally_null():
    basis = sa.alpha_plane(np.array([1.0, 0.5j]))
    assert basis.vectors.shape == (2, 4)
    assert np.max(np.abs(basis.gram())) < 1e-12


@given(spinors)
@settings(max_examples=25)
def test_alpha_planes_of_pi_and_sigma_pi(pi):
    plane = sa.alpha_plane(pi)
    opposite = sa.alpha_plane(sa.sigma_apply(pi))
    scale = 1.0 + sa.norm_squared(pi)
    assert np.max(np.abs(plane.gram())) < 1e-10 * scale
    assert np.linalg.matrix_rank(np.vstack([plane.vectors, opposite.vectors]), tol=1e-8) == 4


@given(spinors)
@settings(max_examples=25)
def test_alpha_plane_depends_only_on_the_line(pi):
    plane = sa.alpha_plane(pi).vectors.T
    rescaled = sa.alpha_plane((0.4 + 1.3j) * pi).vectors.T
    assert span_residual(rescaled, plane) < 1e-9
    assert span_residual(plane, rescaled) < 1e-9


@given(spinors)
@settings(max_examples=25)
def test_endo_J_real_form(pi):
    J = sa.endo_J(pi)
    I = sa.realify(sa.endo_I(pi))
    assert J.shape == (4, 4)
    assert np.allclose(np.imag(J), 0.0)
    assert np.allclose(J @ J, -np.eye(4), atol=1e-10)
    assert np.allclose(I @ J + J @ I, 0.0, atol=1e-10)


def test_lower_and_raise_are_inverse():
    xi = np.array([0.2 - 1.0j, 0.7 + 0.1j])
    assert np.allclose(sa.raise_index(sa.lower_index(xi)), xi)
    # x=0, pi=(1,0) lowers to (0, 1)
    assert np.allclose(sa.lower_index([1.0, 0.0]), [0.0, 1.0])


def test_epsilon_form_antisymmetric():
    a, b = np.array([1.0, 2.0j]), np.array([-0.5, 1.0 + 1.0j])
    assert sa.epsilon_form(a, b) == pytest.approx(-sa.epsilon_form(b, a))
    assert sa.epsilon_form(a, a) == pytest.approx(0.0)


def test_realify_multiplication_by_i():
    real = sa.realify(1j * np.eye(2))
    assert np.allclose(real @ real, -np.eye(4))
    assert np.allclose(real[:2, :2], sa.COMPLEX_UNIT_REAL)


def test_volume_tensor_orientation():
    assert sa.VOLUME[0, 1, 2, 3] == pytest.approx(-1.0)
    assert np.allclose(sa.VOLUME, -np.swapaxes(sa.VOLUME, 0, 1))


def test_soldering_round_trip():
    v = np.array([0.3, -1.2, 0.5, 2.0])
    assert np.allclose(sa.spinor_to_vector(sa.vector_to_spinor(v)), v)


def test_zero_spinor_rejected():
    with pytest.raises(ZeroSpinor):
        sa.endo_I([0.0, 0.0])
    with pytest.raises(TwistorError):
        sa.alpha_plane([1e-16, 0.0])
