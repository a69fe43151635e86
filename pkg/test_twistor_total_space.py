"""Tests for the complex structures, forms and hyperkaehler metric on the total space of S'."""

import numpy as np
import pytest

from errors import InvalidConfig, NotASDEinstein, ZeroLambda, ZeroSpinor
from forms import interior, signature, wedge
from twistor_total_space import (
    TwistorPoint,
    adapted_frame,
    ambient_family,
    ambient_family_check,
    curvature_formula_check,
    ddc_potential_residual,
    dilation_pushforward_check,
    euler_field,
    fiber_dilation,
    forms_tau_omega,
    homogeneity_residual,
    hyperkahler_check,
    integrability_check,
    interior_cross_residual,
    kahler_potential_check,
    metric_tilde_g,
    sample_twistor_points,
    structure_I,
    structure_J,
    structure_K,
    twistor_point,
)


@pytest.fixture(scope="module")
def cp2_point(reversed_cp2):
    return sample_twistor_points(reversed_cp2, 1, seed=5)[0]


def test_twistor_point_round_trip():
    point = TwistorPoint(x=np.array([1.0, 0.0, 0.2, -0.1]), pi=np.array([0.5 + 1.0j, -0.3j]))
    again = TwistorPoint.from_coordinates(point.coordinates)
    assert np.allclose(again.x, point.x)
    assert np.allclose(again.pi, point.pi)


def test_twistor_point_validation(hyperbolic):
    with pytest.raises(ZeroSpinor):
        twistor_point(hyperbolic, np.concatenate([hyperbolic.center, np.zeros(4)]))
    with pytest.raises(InvalidConfig):
        twistor_point(hyperbolic, np.zeros(5))


def test_sampled_spinors_are_bounded_away_from_zero(hyperbolic):
    points = sample_twistor_points(hyperbolic, 10, seed=2)
    assert points.shape == (10, 8)
    assert np.min(np.linalg.norm(points[:, 4:], axis=1)) >= 0.3
    assert np.array_equal(points, sample_twistor_points(hyperbolic, 10, seed=2))


def test_quaternionic_relations(reversed_cp2, cp2_point):
    I, J, K = (f(reversed_cp2, cp2_point) for f in (structure_I, structure_J, structure_K))
    eye = np.eye(8)
    assert np.allclose(I @ I, -eye, atol=1e-10)
    assert np.allclose(J @ J, -eye, atol=1e-10)
    assert np.allclose(K @ K, -eye, atol=1e-10)
    assert np.allclose(I @ J, -J @ I, atol=1e-10)


@pytest.mark.parametrize("structure", [structure_I, structure_J])
def test_fiber_dilation_preserves_structures(hyperbolic, structure):
    p = sample_twistor_points(hyperbolic, 1, seed=9)[0]
    s = 2.5
    D = np.diag([1.0] * 4 + [s] * 4)
    here, there = structure(hyperbolic, p), structure(hyperbolic, fiber_dilation(s, p))
    assert np.allclose(there @ D, D @ here, atol=1e-10)


def test_euler_field_identities(sphere):
    p = sample_twistor_points(sphere, 1, seed=4)[0]
    tau, omega = forms_tau_omega(sphere, p)
    E = euler_field(p)
    assert abs(tau @ E) < 1e-12
    assert np.allclose(interior(E, omega), 2.0 * tau, atol=1e-10)
    assert np.allclose(interior(E, wedge(omega, omega)), 4.0 * wedge(tau, omega), atol=1e-9)


def test_forms_need_asd_einstein(perturbed):
    p = np.concatenate([perturbed.center, [1.0, 0.0, 0.0, 0.0]])
    with pytest.raises(NotASDEinstein):
        forms_tau_omega(perturbed, p)


def test_metric_needs_nonzero_lambda(flat):
    with pytest.raises(ZeroLambda):
        metric_tilde_g(flat, np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]))


def test_metric_signature_follows_lambda(hyperbolic, sphere):
    negative = metric_tilde_g(hyperbolic, sample_twistor_points(hyperbolic, 1)[0]).metric
    positive = metric_tilde_g(sphere, sample_twistor_points(sphere, 1)[0]).metric
    assert signature(negative) == (4, 4)
    assert signature(positive) == (8, 0)


def test_metric_is_hermitian_for_I_and_J(reversed_cp2, cp2_point):
    g = metric_tilde_g(reversed_cp2, cp2_point).metric
    for structure in (structure_I, structure_J):
        S = structure(reversed_cp2, cp2_point)
        assert np.allclose(S.T @ g @ S, g, atol=1e-9)


def test_adapted_frame_diagonalizes_metric(sphere):
    p = sample_twistor_points(sphere, 1, seed=6)[0]
    frame = adapted_frame(sphere, p)
    g = frame.T @ metric_tilde_g(sphere, p).metric @ frame
    norm = float(np.sum(p[4:] ** 2))
    assert np.allclose(g[:4, :4], 0.5 * norm * np.eye(4), atol=1e-9)
    assert np.allclose(g[:4, 4:], 0.0, atol=1e-9)


@pytest.mark.parametrize("name", ["hyperbolic", "sphere", "reversed_cp2"])
def test_integrability(name, request):
    report = integrability_check(request.getfixturevalue(name), samples=2)
    assert report.passed, report.to_dict()


@pytest.mark.parametrize("name", ["hyperbolic", "reversed_cp2"])
def test_kahler_potential(name, request):
    report = kahler_potential_check(request.getfixturevalue(name), samples=2)
    assert report.passed, report.to_dict()
    assert report.check("ddc-potential").max_residual < 1e-5


@pytest.mark.slow
@pytest.mark.parametrize("name", ["hyperbolic", "sphere", "reversed_cp2"])
def test_hyperkahler(name, request):
    report = hyperkahler_check(request.getfixturevalue(name), samples=1)
    assert report.passed, report.to_dict()


@pytest.mark.slow
def test_curvature_formula_on_reversed_cp2(reversed_cp2):
    report = curvature_formula_check(reversed_cp2, samples=1)
    assert report.passed, report.to_dict()


def test_hyperkahler_skips_flat_base(flat):
    report = hyperkahler_check(flat, samples=1)
    assert report.skipped
    assert report.checks == []


def test_ambient_potential_is_norm_times_r(compactified):
    geomX, r = compactified
    p = np.array([0.3, 0.1, -0.2, 0.0, 0.6, -0.4, 0.2, 0.9])
    values = ambient_family(geomX, r, p)
    assert values.potential == pytest.approx(0.3 * np.sum(p[4:] ** 2))
    assert np.allclose(values.metric, values.metric.T, atol=1e-12)


def test_ambient_family_crosses_the_boundary(compactified):
    geomX, r = compactified
    for x0 in (0.2, 0.0, -0.2):
        p = np.array([x0, 0.1, 0.3, -0.2, 0.7, 0.1, -0.5, 0.4])
        assert ddc_potential_residual(geomX, r, p) < 1e-8
        assert homogeneity_residual(geomX, r, p) < 1e-8
    assert signature(ambient_family(geomX, r, np.array([0.0, 0.1, 0.3, -0.2, 0.7, 0.1, -0.5, 0.4])).metric) == (4, 4)


def test_ambient_family_matches_interior_metric(compactified):
    geomX, r = compactified
    for x0 in (0.4, -0.4):
        p = np.array([x0, 0.2, -0.1, 0.3, 0.5, 0.5, -0.3, 0.2])
        assert interior_cross_residual(geomX, r, p) < 1e-6


def test_dilation_equivariance(compactified):
    geomX, r = compactified
    report = dilation_pushforward_check(geomX, r, lambda x: 0.3 * x[1] - 0.2 * x[2] ** 2, samples=2)
    assert report.passed, report.to_dict()


@pytest.mark.slow
def test_ambient_family_suite(compactified):
    geomX, r = compactified
    report = ambient_family_check(geomX, r, samples=2)
    assert report.passed, report.to_dict()
    assert [record.check for record in report.checks] == [
        "ddc-r-tilde", "interior-cross", "shrinking-r", "dilation-metric", "dilation-I", "dilation-J", "homogeneity",
        "special-defining"]
