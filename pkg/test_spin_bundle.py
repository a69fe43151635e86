"""Tests for the spin connection and the curvature of the primed spin bundle."""

import numpy as np
import jax
import jax.numpy as jnp
import pytest

import spinor_algebra as sa
from base_geometry import conformal_rescale
from errors import NotASDEinstein, ZeroSpinor
from spin_bundle import (
    conformal_spin_shift,
    delta_pi_coframe,
    horizontal_lift,
    require_asd_einstein,
    spin_connection,
    spin_connection_check,
    sprime_curvature,
    sprime_residuals,
)


def test_flat_connection_vanishes(flat):
    coeffs = spin_connection(flat, np.array([0.1, 0.2, -0.3, 0.4]))
    assert np.max(np.abs(coeffs.primed)) < 1e-12
    assert np.max(np.abs(coeffs.unprimed)) < 1e-12


def test_connection_induces_levi_civita(reversed_cp2):
    coeffs = spin_connection(reversed_cp2, reversed_cp2.center + 0.15)
    assert coeffs.residual < 1e-8
    assert coeffs.epsilon_residual < 1e-10


@pytest.mark.parametrize("name", ["hyperbolic", "sphere", "reversed_cp2"])
def test_sprime_curvature_identities(name, request, rng):
    geom = request.getfixturevalue(name)
    pi = rng.normal(size=2) + 1j * rng.normal(size=2)
    direct, conjugate = sprime_residuals(geom, geom.center + 0.1, pi)
    assert direct < 1e-7
    assert conjugate < 1e-7


def test_sprime_curvature_needs_asd_einstein(perturbed):
    with pytest.raises(NotASDEinstein):
        sprime_curvature(perturbed, perturbed.center)
    with pytest.raises(NotASDEinstein):
        require_asd_einstein(perturbed, perturbed.center)


def test_conformal_shift_matches_rescaled_connection(hyperbolic):
    upsilon = lambda y: 0.2 * y[1] - 0.1 * y[2] ** 2  # noqa: E731
    x = hyperbolic.center + 0.05
    coeffs = spin_connection(hyperbolic, x)
    d_upsilon = np.asarray(jax.grad(upsilon)(jnp.asarray(x)))
    shifted = conformal_spin_shift(coeffs, d_upsilon, float(upsilon(jnp.asarray(x))))
    target = spin_connection(conformal_rescale(hyperbolic, upsilon), x)
    assert np.max(np.abs(shifted.primed - target.primed)) < 1e-8
    assert np.max(np.abs(shifted.unprimed - target.unprimed)) < 1e-8

    back = conformal_spin_shift(shifted, -d_upsilon, -float(upsilon(jnp.asarray(x))))
    assert np.max(np.abs(back.primed - coeffs.primed)) < 1e-10


def test_horizontal_lift_is_annihilated_by_delta_pi(reversed_cp2):
    p = np.concatenate([reversed_cp2.center + 0.1, [0.4, -0.2, 1.1, 0.3]])
    coframe = delta_pi_coframe(reversed_cp2, p)
    lift = horizontal_lift(reversed_cp2, p, np.array([1.0, 0.5, 0.0, -0.3]))
    assert np.allclose(lift[:4], [1.0, 0.5, 0.0, -0.3], atol=1e-12)
    assert np.max(np.abs(coframe[4:6] @ lift)) < 1e-12


def test_delta_pi_rejects_zero_spinor(flat):
    with pytest.raises(ZeroSpinor):
        delta_pi_coframe(flat, np.zeros(8))


def test_spin_connection_suite(sphere):
    report = spin_connection_check(sphere, samples=2)
    assert report.passed, report.to_dict()
    assert [record.check for record in report.checks] == [
        "nabla-gamma", "nabla-epsilon", "sprime-curvature", "omega-star-pi", "conformal-shift"]


def test_sprime_curvature_is_su2_valued(reversed_cp2):
    omega = sprime_curvature(reversed_cp2, reversed_cp2.center + 0.1).omega
    eps = sa.EPSILON
    assert np.allclose(np.conj(omega), eps @ omega @ np.linalg.inv(eps), atol=1e-8)
    assert np.max(np.abs(np.trace(omega, axis1=2, axis2=3))) < 1e-8
