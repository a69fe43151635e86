"""Tests for charted geometries, curvature spinors and the catalog."""

import numpy as np
import jax.numpy as jnp
import pytest

from base_geometry import (
    ChartedGeometry,
    asd_einstein_check,
    conformal_rescale,
    curvature_spinors,
    einstein_lambda,
    orthonormal_coframe,
    sample_points,
    special_defining_check,
    validated_point,
    weyl_conformal_residual,
)
from errors import DegenerateMetric, InvalidConfig, UnknownGeometry
from geometry_catalog import CATALOG, compactified_partner, create_geometry


def test_hyperbolic_curvature_spinors(hyperbolic):
    spinors = curvature_spinors(hyperbolic, hyperbolic.center)
    assert spinors.lam == pytest.approx(-0.5, abs=1e-8)
    assert np.max(np.abs(spinors.psi)) < 1e-8
    assert np.max(np.abs(spinors.psi_tilde)) < 1e-8
    assert np.max(np.abs(spinors.phi)) < 1e-8


def test_round_sphere_lambda(sphere):
    assert curvature_spinors(sphere, sphere.center + 0.1).lam == pytest.approx(0.5, abs=1e-8)


def test_reversed_cp2_is_asd_einstein(reversed_cp2):
    report = asd_einstein_check(reversed_cp2, samples=3)
    assert report.passed, report.to_dict()
    assert einstein_lambda(reversed_cp2) == pytest.approx(1.0, abs=1e-8)
    spinors = curvature_spinors(reversed_cp2, reversed_cp2.center)
    assert np.max(np.abs(spinors.psi)) > 1e-3


def test_complex_orientation_is_self_dual():
    report = asd_einstein_check(create_geometry("fubini-study"), samples=2)
    assert not report.check("psi-tilde").passed


def test_perturbed_metric_fails(perturbed):
    report = asd_einstein_check(perturbed, samples=2)
    assert not report.passed
    assert not report.check("phi").passed


def test_reassembly_residual(reversed_cp2):
    assert curvature_spinors(reversed_cp2, reversed_cp2.center).reassembly_residual < 1e-8


def test_coframe_is_orthonormal(reversed_cp2):
    x = reversed_cp2.center + 0.2
    frame = orthonormal_coframe(reversed_cp2, x)
    g = reversed_cp2.metric_at(x)
    assert np.allclose(frame.frame.T @ g @ frame.frame, np.eye(4), atol=1e-12)


def test_weyl_conformal_invariance(reversed_cp2):
    upsilon = lambda x: 0.1 * x[0] ** 2 - 0.05 * x[1]  # noqa: E731
    assert weyl_conformal_residual(reversed_cp2, upsilon, reversed_cp2.center + 0.1) < 1e-6


def test_conformal_rescale_keeps_chart(hyperbolic):
    rescaled = conformal_rescale(hyperbolic, lambda x: 0.2 * x[1])
    x = hyperbolic.center
    assert rescaled.lower == hyperbolic.lower
    assert np.allclose(rescaled.metric_at(x), np.exp(0.4 * x[1]) * hyperbolic.metric_at(x))


def test_sampling_is_seeded_and_inside(hyperbolic):
    first, second = sample_points(hyperbolic, 5, seed=3), sample_points(hyperbolic, 5, seed=3)
    assert np.array_equal(first, second)
    assert all(hyperbolic.contains(x) for x in first)


def test_compactified_sampling_avoids_boundary(compactified):
    geomX, r = compactified
    points = sample_points(geomX, 20, seed=1)
    assert np.min(np.abs([float(r(jnp.asarray(x))) for x in points])) >= 0.05


def test_special_defining_function(compactified):
    geomX, r = compactified
    report = special_defining_check(geomX, r, samples=3)
    assert report.check("gradient-norm").passed
    assert report.check("totally-geodesic").passed


def test_scaled_defining_function_is_not_special(compactified):
    geomX, _ = compactified
    report = special_defining_check(geomX, lambda x: 2.0 * x[0], samples=3)
    assert not report.check("gradient-norm").passed


def test_degenerate_metric_rejected():
    geom = ChartedGeometry(
        name="degenerate",
        metric=lambda x: jnp.diag(jnp.array([1.0, 1.0, 1.0, 0.0])) + 0.0 * x[0],
        lower=(-1.0,) * 4,
        upper=(1.0,) * 4,
    )
    with pytest.raises(DegenerateMetric):
        validated_point(geom, np.zeros(4))


def test_invalid_chart_box():
    with pytest.raises(InvalidConfig):
        ChartedGeometry(name="empty", metric=lambda x: jnp.eye(4), lower=(1.0,) * 4, upper=(0.0,) * 4)
    with pytest.raises(InvalidConfig):
        validated_point(create_geometry("flat"), np.zeros(3))


def test_catalog_factory(monkeypatch):
    assert set(CATALOG) >= {"flat", "hyperbolic", "round-s4", "fubini-study-reversed", "flat-r3"}
    monkeypatch.setenv("TWISTOR_GEOMETRY", "round-s4")
    assert create_geometry().name == "round-s4"
    assert create_geometry("  Hyperbolic ").name == "hyperbolic"
    with pytest.raises(UnknownGeometry):
        create_geometry("klein-bottle")


def test_compactified_partner(hyperbolic, flat):
    geomX, r = compactified_partner(hyperbolic)
    assert geomX.name == "hyperbolic-compactified"
    assert float(r(jnp.array([0.3, 0.0, 0.0, 0.0]))) == pytest.approx(0.3)
    assert compactified_partner(flat) is None
