"""Tests for the Kaehler-Einstein and Cheng-Yau metrics on the projective twistor space."""

import numpy as np
import pytest

from errors import BoundaryPoint, InvalidConfig, NotASDEinstein, ZeroLambda
from forms import signature
from projective_twistor import (
    ProjectivePoint,
    chart_overlap_residual,
    chart_transition,
    cheng_yau_check,
    cheng_yau_metric,
    fubini_study_block,
    ke_blocks,
    ke_einstein_residual,
    ke_metric,
    ke_metric_check,
    ma_descent_residual,
    projective_point,
    sample_projective_points,
)


def test_fubini_study_block_at_origin():
    assert np.allclose(fubini_study_block(0.0), 2.0 * np.eye(2))
    assert np.allclose(fubini_study_block(1.0j), 0.5 * np.eye(2))


def test_chart_transition_inverts_z():
    q = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 2.0])
    assert np.allclose(chart_transition(q)[4:], [0.0, -0.5])


def test_projective_point_validation(hyperbolic):
    with pytest.raises(InvalidConfig):
        projective_point(hyperbolic, np.zeros(4))
    with pytest.raises(InvalidConfig):
        projective_point(hyperbolic, ProjectivePoint(x=hyperbolic.center, z=0.5j, chart=2))
    q, chart = projective_point(hyperbolic, ProjectivePoint(x=hyperbolic.center, z=0.5j, chart=1))
    assert chart == 1
    assert q[5] == pytest.approx(0.5)


def test_projective_samples_are_seeded(sphere):
    points = sample_projective_points(sphere, 6, seed=8)
    moduli = np.hypot(points[:, 4], points[:, 5])
    assert np.all((moduli >= 0.2) & (moduli <= 2.0))
    assert np.array_equal(points, sample_projective_points(sphere, 6, seed=8))


@pytest.mark.parametrize("name", ["hyperbolic", "sphere", "reversed_cp2"])
def test_ke_blocks(name, request):
    geom = request.getfixturevalue(name)
    lam = geom.lambda_value
    for q in sample_projective_points(geom, 2, seed=3):
        H, M, F = ke_blocks(geom, q)
        assert np.max(np.abs(H - lam * np.eye(4))) < 1e-6
        assert np.max(np.abs(M)) < 1e-6
        assert np.max(np.abs(F - fubini_study_block(complex(q[4], q[5])))) < 1e-8


def test_ke_signature_follows_lambda(hyperbolic, sphere):
    q = np.concatenate([hyperbolic.center, [0.3, -0.4]])
    assert signature(ke_metric(hyperbolic, q)) == (2, 4)
    assert signature(ke_metric(sphere, np.concatenate([sphere.center, [0.3, -0.4]]))) == (6, 0)


def test_chart_overlap(reversed_cp2):
    q = np.concatenate([reversed_cp2.center + 0.1, [0.7, 0.4]])
    assert chart_overlap_residual(reversed_cp2, q) < 1e-8


def test_ma_descent(sphere):
    p = np.concatenate([sphere.center + 0.2, [0.8, 0.3, -0.5, 0.6]])
    assert ma_descent_residual(sphere, p) < 1e-4


@pytest.mark.slow
def test_einstein_constant(reversed_cp2):
    q = np.concatenate([reversed_cp2.center + 0.1, [0.5, -0.2]])
    assert ke_einstein_residual(reversed_cp2, q) < 1e-3


def test_ke_metric_errors(flat, perturbed):
    with pytest.raises(ZeroLambda):
        ke_metric(flat, np.zeros(6))
    with pytest.raises(NotASDEinstein):
        ke_metric(perturbed, np.concatenate([perturbed.center, [0.5, 0.5]]))


def test_ke_suite_skips_flat(flat):
    report = ke_metric_check(flat, samples=1)
    assert report.skipped


def test_cheng_yau_signature_and_boundary(compactified):
    geomX, r = compactified
    q = np.array([0.5, 0.1, -0.2, 0.3, 0.4, 0.9])
    g = cheng_yau_metric(geomX, r, q)
    assert signature(g) == (4, 2)
    with pytest.raises(BoundaryPoint):
        cheng_yau_metric(geomX, r, np.array([0.01, 0.0, 0.0, 0.0, 0.3, 0.3]))


def test_cheng_yau_suite(compactified):
    geomX, r = compactified
    report = cheng_yau_check(geomX, r, samples=2)
    assert report.passed, report.to_dict()
    assert "(4,2)" in report.check("block-structure").note
