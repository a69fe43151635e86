"""Tests for the twistor CR structure over 3-manifolds and the embedding from the boundary slice."""

import numpy as np
import pytest

from base_geometry import conformal_rescale
from errors import DegenerateDefiningFunction, InvalidConfig, NotNull, ZeroSpinor
from twistor_cr import (
    boundary_geometry,
    cr_distribution,
    cr_point,
    embedding_check,
    embedding_residual,
    involutivity_residual,
    isotropy_residual,
    levi_form,
    sample_cr_points,
    tangential_residual,
    tangential_spinor,
    twistor_cr_check,
)

ZETA = np.array([1.0, 1.0j, 0.0])
ORIGIN = np.zeros(3)


def test_cr_point_requires_null_covector(flat_r3, flat):
    assert cr_point(flat_r3, ORIGIN, ZETA).shape == (9,)
    with pytest.raises(NotNull):
        cr_point(flat_r3, ORIGIN, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(NotNull):
        cr_point(flat_r3, ORIGIN, np.zeros(3))
    with pytest.raises(InvalidConfig):
        cr_point(flat, np.zeros(4), ZETA)


def test_sampled_covectors_are_null(flat_r3):
    points = sample_cr_points(flat_r3, 5, seed=4)
    zeta = points[:, 3:6] + 1j * points[:, 6:]
    assert np.max(np.abs(np.sum(zeta * zeta, axis=1))) < 1e-12
    assert np.array_equal(points, sample_cr_points(flat_r3, 5, seed=4))


def test_distribution_shape(flat_r3):
    distribution = cr_distribution(flat_r3, ORIGIN, ZETA)
    assert distribution.basis.shape == (3, 9)
    assert np.allclose(distribution.euler[3:6], 0.5 * ZETA)


def test_isotropy_and_involutivity_on_flat(flat_r3):
    assert isotropy_residual(flat_r3, ORIGIN, ZETA) < 1e-10
    assert involutivity_residual(flat_r3, ORIGIN, ZETA) < 1e-6


def test_levi_form_has_mixed_signature(flat_r3):
    value = levi_form(flat_r3, ORIGIN, ZETA)
    assert np.allclose(value.matrix, value.matrix.conj().T)
    assert value.signature == (1, 1)


@pytest.mark.parametrize("scale", [2.0, 0.5j, 1.0 - 1.0j])
def test_levi_signature_is_scale_invariant(flat_r3, scale):
    assert levi_form(flat_r3, ORIGIN, scale * ZETA).signature == (1, 1)


def test_levi_signature_is_conformally_invariant(flat_r3):
    rescaled = conformal_rescale(flat_r3, lambda x: 0.3 * x[0] - 0.2 * x[2] ** 2)
    x = np.array([0.2, -0.1, 0.3])
    for s in sample_cr_points(rescaled, 3, seed=7):
        zeta = s[3:6] + 1j * s[6:]
        assert levi_form(rescaled, s[:3], zeta).signature == (1, 1)
    assert isotropy_residual(rescaled, x, ZETA) < 1e-10


def test_boundary_geometry_is_cached(compactified):
    geomX, r = compactified
    h3 = boundary_geometry(geomX, r)
    assert h3 is boundary_geometry(geomX, r)
    assert h3.dimension == 3
    assert np.allclose(h3.metric_at(np.array([0.1, 0.2, -0.3])), np.eye(3), atol=1e-12)


def test_tangential_spinor_is_normalized(compactified):
    geomX, r = compactified
    x = np.array([0.0, 0.2, -0.1, 0.3])
    pi = np.array([0.4 + 0.3j, -1.1j])
    xi = tangential_spinor(geomX, r, x, pi)
    assert np.linalg.norm(xi) == pytest.approx(1.0)
    lead = xi[0] if abs(xi[0]) > 1e-12 else xi[1]
    assert abs(lead.imag) < 1e-12 and lead.real > 0
    assert tangential_residual(geomX, r, x, pi) < 1e-12


def test_tangential_spinor_ignores_pi_scale(compactified):
    geomX, r = compactified
    x = np.array([0.0, -0.3, 0.1, 0.0])
    pi = np.array([0.7, 0.2 + 0.5j])
    assert np.allclose(tangential_spinor(geomX, r, x, pi), tangential_spinor(geomX, r, x, (2.0 - 1.0j) * pi))


def test_tangential_spinor_errors(compactified):
    geomX, r = compactified
    with pytest.raises(ZeroSpinor):
        tangential_spinor(geomX, r, np.zeros(4), np.zeros(2))
    with pytest.raises(DegenerateDefiningFunction):
        tangential_spinor(geomX, lambda x: x[0] ** 2, np.zeros(4), np.array([1.0, 0.0]))


def test_embedding_is_a_cr_map(compactified):
    geomX, r = compactified
    horizontal, fiber = embedding_residual(geomX, r, np.array([0.1, -0.2, 0.3]), np.array([0.6 - 0.2j, 0.9j]))
    assert horizontal < 1e-6
    assert fiber < 1e-6


def test_embedding_suite(compactified):
    geomX, r = compactified
    report = embedding_check(geomX, r, samples=3)
    assert report.passed, report.to_dict()
    assert [record.check for record in report.checks] == ["tangential-spinor", "embedding"]


def test_twistor_cr_suite_on_flat_r3(flat_r3):
    report = twistor_cr_check(flat_r3, samples=3)
    assert report.passed, report.to_dict()
    assert report.check("levi-signature").note == "observed (1,1)"


@pytest.mark.slow
def test_twistor_cr_suite_with_boundary(compactified):
    geomX, r = compactified
    report = twistor_cr_check(geomX=geomX, r=r, samples=3)
    assert report.passed, report.to_dict()
    assert [record.check for record in report.checks] == [
        "isotropy", "involutivity", "levi-signature", "tangential-spinor", "embedding"]


def test_twistor_cr_suite_needs_a_three_manifold(flat):
    with pytest.raises(InvalidConfig):
        twistor_cr_check()
    with pytest.raises(InvalidConfig):
        twistor_cr_check(flat, samples=1)
