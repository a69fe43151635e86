"""
Spin connection of an orthonormal frame, curvature of S', conformal change
of the spin connection and the delta-pi coframe of the total space.

The spin connection is the unique pair (P_c, Q_c) of traceless 2x2 matrices with

    sum_b omega_c^b_a G[b] = P_c G[a] + G[a] Q_c^T      for every frame leg a,

where omega is the frame Levi-Civita connection. P_c[B, A] = Gamma_cA^B and
Q_c[B', A'] = Gamma_cA'^B'. The system is solved with a fixed pseudo-inverse,
so the map omega -> (P, Q) is linear and differentiates cleanly; the residual
of the solve is reported as the nabla-gamma check.
"""

from dataclasses import dataclass
from functools import partial
from typing import Dict, Optional

import numpy as np
import jax
import jax.numpy as jnp

import spinor_algebra as sa
from base_geometry import (
    ChartedGeometry,
    _coframe,
    _frame,
    _frame_connection,
    conformal_rescale,
    curvature_spinors,
    resolve_samples,
    validated_point,
)
from derivatives import check_mode, jacobian
from errors import NotASDEinstein
from reports import DEFAULT_SEED, VerificationReport

ASD_TOL = 1e-6


def _soldering_system():
    """Matrix of (P, Q) -> (P G[a] + G[a] Q^T for all a, tr P, tr Q)."""
    system = np.zeros((18, 8), dtype=complex)
    for k in range(8):
        unknown = np.zeros(8, dtype=complex)
        unknown[k] = 1.0
        P, Q = unknown[:4].reshape(2, 2), unknown[4:].reshape(2, 2)
        blocks = [(P @ sa.SOLDERING[a] + sa.SOLDERING[a] @ Q.T).ravel() for a in range(4)]
        system[:16, k] = np.concatenate(blocks)
        system[16, k] = np.trace(P)
        system[17, k] = np.trace(Q)
    return system


SOLDERING_SYSTEM = _soldering_system()
SOLVE = np.linalg.pinv(SOLDERING_SYSTEM)[:, :16]


@dataclass(frozen=True)
class SpinConnectionCoeffs:
    unprimed: np.ndarray   # P[c, B, A] = Gamma_cA^B
    primed: np.ndarray     # Q[c, B', A'] = Gamma_cA'^B'
    coframe: np.ndarray    # theta[a, mu] of the frame the coefficients refer to
    residual: float        # nabla gamma = 0 residual of the solve
    epsilon_residual: float


@dataclass(frozen=True)
class SprimeCurvature:
    omega: np.ndarray  # Omega[a, b, C', D']


# ---------------------------------------------------------------------------
# Traced kernels
# ---------------------------------------------------------------------------

def _connection_rhs(omega):
    """Right-hand sides sum_b omega_c^b_a G[b], flattened to (4, 16)."""
    return jnp.einsum("cba,bXY->caXY", omega, sa.SOLDERING).reshape(4, 16)


def _spin_coefficients(geom: ChartedGeometry, x):
    unknowns = _connection_rhs(_frame_connection(geom, x)) @ SOLVE.T
    return unknowns[:, :4].reshape(4, 2, 2), unknowns[:, 4:].reshape(4, 2, 2)


def _primed_connection(geom: ChartedGeometry, x):
    return _spin_coefficients(geom, x)[1]


def _sprime_curvature(geom: ChartedGeometry, x, mode: str = "dual"):
    frame = _frame(geom, x)
    omega = _frame_connection(geom, x)
    Q = _primed_connection(geom, x)
    dQ = jacobian(partial(_primed_connection, geom), mode)(x)  # [c, B', A', mu]
    eQ = jnp.einsum("cXYm,ma->acXY", dQ, frame)               # e_a(Q_c)
    bracket = jnp.einsum("aXZ,bZY->abXY", Q, Q) - jnp.einsum("bXZ,aZY->abXY", Q, Q)
    torsion_free = jnp.einsum("acb,cXY->abXY", omega, Q) - jnp.einsum("bca,cXY->abXY", omega, Q)
    return eQ - jnp.swapaxes(eQ, 0, 1) + bracket - torsion_free


def _delta_pi_rows(geom: ChartedGeometry, p):
    """D[A', :] = dpi^A' + (Q_c pi)^A' theta^c as complex covectors on the 8 real coordinates."""
    x, pi = p[:4], p[4::2] + 1j * p[5::2]
    theta = _coframe(geom, x)
    Q = _primed_connection(geom, x)
    horizontal = jnp.einsum("cXY,Y,cm->Xm", Q, pi, theta)
    vertical = jnp.array([[1.0, 1.0j, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0j]])
    return jnp.concatenate([horizontal, vertical], axis=1)


def _complex_coframe(geom: ChartedGeometry, p):
    theta = _coframe(geom, p[:4])
    horizontal = jnp.concatenate([theta, jnp.zeros((4, 4))], axis=1).astype(complex)
    delta = _delta_pi_rows(geom, p)
    return jnp.concatenate([horizontal, delta, jnp.conj(delta)], axis=0)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def spin_connection(geom: ChartedGeometry, x) -> SpinConnectionCoeffs:
    """
    Spin connection coefficients in the Gram-Schmidt frame at x.

    Raises:
        DegenerateMetric: If the metric is unusable at x
    """
    x = validated_point(geom, x)
    omega = np.asarray(geom.kernel("frame-connection", partial(_frame_connection, geom))(x))
    rhs = np.asarray(_connection_rhs(omega))
    unknowns = rhs @ SOLVE.T
    residual = np.abs(unknowns @ SOLDERING_SYSTEM[:16].T - rhs)
    P = unknowns[:, :4].reshape(4, 2, 2)
    Q = unknowns[:, 4:].reshape(4, 2, 2)
    # lowered Gamma_c A'B' = Q[c, C', A'] eps_C'B' must be symmetric (nabla eps = 0)
    lowered = [np.einsum("cXA,XB->cAB", M, sa.EPSILON) for M in (P, Q)]
    epsilon_residual = max(np.max(np.abs(L - np.swapaxes(L, 1, 2))) for L in lowered)
    theta = np.asarray(geom.kernel("coframe", partial(_coframe, geom))(x))
    return SpinConnectionCoeffs(
        unprimed=P,
        primed=Q,
        coframe=theta,
        residual=float(np.max(residual)),
        epsilon_residual=float(epsilon_residual),
    )


def require_asd_einstein(geom: ChartedGeometry, x, tol: float = ASD_TOL):
    """
    Raises:
        NotASDEinstein: If Psi~ or Phi exceed tol at x
    """
    spinors = curvature_spinors(geom, x)
    psi_tilde, phi = np.max(np.abs(spinors.psi_tilde)), np.max(np.abs(spinors.phi))
    if psi_tilde > tol or phi > tol:
        raise NotASDEinstein(
            f"Geometry '{geom.name}' is not anti-self-dual Einstein at x = {x}.\n"
            f"|Psi~| = {psi_tilde:.3e}, |Phi| = {phi:.3e} (tolerance {tol:.1e}).\n"
            "Run the asd-einstein suite to see where the identity fails."
        )
    return spinors


def sprime_curvature(geom: ChartedGeometry, x, mode: str = "dual") -> SprimeCurvature:
    """
    Curvature Omega_ab^C'_D' of the primed spin bundle at x.

    Raises:
        NotASDEinstein: If the geometry is not anti-self-dual Einstein at x
    """
    check_mode(mode)
    x = validated_point(geom, x)
    require_asd_einstein(geom, x)
    omega = geom.kernel(("sprime-curvature", mode), partial(_sprime_curvature, geom, mode=mode))(x)
    return SprimeCurvature(omega=np.asarray(omega))


def sprime_expected(lam: float, pi) -> np.ndarray:
    """2 Lambda eps_AB delta_(A'^C' pi_B') in frame components [a, b, C']."""
    pi = sa.as_spinor(pi)
    p_low = sa.lower_index(pi)
    sym = 0.5 * (np.einsum("PC,Q->PQC", np.eye(2), p_low) + np.einsum("QC,P->PQC", np.eye(2), p_low))
    spinor = 2.0 * lam * np.einsum("AB,PQC->APBQC", sa.EPSILON, sym)
    return np.einsum("aAP,bBQ,APBQC->abC", sa.SOLDERING, sa.SOLDERING, spinor)


def omega_star_expected(lam: float, pi) -> np.ndarray:
    """-2 Lambda eps_AB sigma_(A'^C' (sigma pi)_B') in frame components; sigma_A'^C' = eps[C', A']."""
    pi = sa.as_spinor(pi)
    s_low = sa.lower_index(sa.sigma_apply(pi))
    sigma_mixed = sa.EPSILON.T  # [A', C']
    sym = 0.5 * (np.einsum("PC,Q->PQC", sigma_mixed, s_low) + np.einsum("QC,P->PQC", sigma_mixed, s_low))
    spinor = -2.0 * lam * np.einsum("AB,PQC->APBQC", sa.EPSILON, sym)
    return np.einsum("aAP,bBQ,APBQC->abC", sa.SOLDERING, sa.SOLDERING, spinor)


def sprime_residuals(geom: ChartedGeometry, x, pi, mode: str = "dual"):
    """
    (Omega pi - expected, conj(Omega) conj(pi) - expected) worst entries at x.

    The conjugate side is contracted against sigma(pi): for real frame legs Omega is
    su(2)-valued, so conj(Omega) conj(pi) = -eps Omega sigma(pi).
    """
    omega = sprime_curvature(geom, x, mode).omega
    lam = curvature_spinors(geom, x).lam
    pi = sa.require_nonzero(pi)
    contracted = np.einsum("abCD,D->abC", omega, pi)
    direct = np.max(np.abs(contracted - sprime_expected(lam, pi)))
    conjugate_side = -np.einsum("CE,abE->abC", sa.EPSILON, np.einsum("abCD,D->abC", omega, sa.sigma_apply(pi)))
    conjugate = np.max(np.abs(conjugate_side - omega_star_expected(lam, pi)))
    return float(direct), float(conjugate)


def conformal_spin_shift(coeffs: SpinConnectionCoeffs, d_upsilon, upsilon: float = 0.0) -> SpinConnectionCoeffs:
    """
    Spin connection of e^(2U) g in the rescaled frame theta^ = e^U theta.

    Uses nabla^_a xi^B = nabla_a xi^B + delta_A^B U_CA' xi^C and
    nabla^_a eta^B' = nabla_a eta^B' + delta_A'^B' U_AC' eta^C', then moves to
    the rescaled spin frame (weight e^(U/2)).

    Args:
        coeffs: Coefficients of g in its Gram-Schmidt frame
        d_upsilon: Coordinate differential dU at the point (4 numbers)
        upsilon: U at the point
    """
    frame = np.linalg.inv(coeffs.coframe)
    u_frame = frame.T @ np.asarray(d_upsilon, dtype=float)        # U_c
    u_spinor = np.einsum("dAP,d->AP", sa.SOLDERING_INVERSE, u_frame)  # U_AA'
    primed_shift = np.einsum("cAB,AC->cBC", sa.SOLDERING, u_spinor)
    unprimed_shift = np.einsum("cBP,CP->cBC", sa.SOLDERING, u_spinor)
    half_weight = 0.5 * np.einsum("c,XY->cXY", u_frame, np.eye(2))
    scale = np.exp(-upsilon)
    return SpinConnectionCoeffs(
        unprimed=scale * (coeffs.unprimed + unprimed_shift - half_weight),
        primed=scale * (coeffs.primed + primed_shift - half_weight),
        coframe=np.exp(upsilon) * coeffs.coframe,
        residual=coeffs.residual,
        epsilon_residual=coeffs.epsilon_residual,
    )


def delta_pi_coframe(geom: ChartedGeometry, p) -> np.ndarray:
    """
    Complexified coframe (theta^a, delta pi^A', conj delta pi^A') as rows over
    the real coordinates (x, Re pi0, Im pi0, Re pi1, Im pi1).

    Raises:
        DegenerateMetric: If the metric is unusable at the base point
        ZeroSpinor: If pi vanishes
    """
    p = np.asarray(p, dtype=float).reshape(8)
    validated_point(geom, p[:4])
    sa.require_nonzero(p[4::2] + 1j * p[5::2])
    return np.asarray(geom.kernel("complex-coframe", partial(_complex_coframe, geom))(p))


def horizontal_lift(geom: ChartedGeometry, p, v) -> np.ndarray:
    """Horizontal lift of a coordinate tangent vector v at x to the point p (8 real components)."""
    coframe = delta_pi_coframe(geom, p)
    lifts = np.linalg.inv(coframe)[:, :4]  # columns: lifts of the frame vectors e_a
    theta = coframe[:4, :4]
    return np.real(lifts @ (theta @ np.asarray(v, dtype=float)))


SPIN_ANCHORS = {
    "nabla-gamma": "spin connection induces the Levi-Civita connection",
    "nabla-epsilon": "spin connection preserves eps",
    "sprime-curvature": "Omega pi = 2 Lambda eps_AB delta_(A'^C' pi_B')",
    "omega-star-pi": "conj(Omega) conj(pi) = -2 Lambda eps_AB sigma_(A'^C' (sigma pi)_B')",
    "conformal-shift": "spin connection transforms with dU under g -> e^(2U) g",
}


def spin_connection_check(geom: ChartedGeometry, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                          mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """Suite: nabla gamma, nabla eps, the S' curvature identities and the conformal shift."""
    report = VerificationReport("spin-connection", geom.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    points = resolve_samples(geom, samples, seed)
    rng = np.random.default_rng(seed + 1)

    def upsilon(y):
        return 0.1 * y[1] ** 2 - 0.05 * y[0] * y[2] + 0.07 * y[3]

    rescaled = conformal_rescale(geom, upsilon)
    gamma, eps, direct, conjugate, shift = [], [], [], [], []
    for x in points:
        coeffs = spin_connection(geom, x)
        gamma.append(coeffs.residual)
        eps.append(coeffs.epsilon_residual)
        pi = rng.normal(size=2) + 1j * rng.normal(size=2)
        try:
            d, c = sprime_residuals(geom, x, pi, mode)
        except NotASDEinstein:
            d = c = float("inf")
        direct.append(d)
        conjugate.append(c)
        d_upsilon = np.asarray(jax.grad(upsilon)(jnp.asarray(x)))
        shifted = conformal_spin_shift(coeffs, d_upsilon, float(upsilon(jnp.asarray(x))))
        target = spin_connection(rescaled, x)
        shift.append(max(np.max(np.abs(shifted.primed - target.primed)),
                         np.max(np.abs(shifted.unprimed - target.unprimed))))
    report.add("nabla-gamma", SPIN_ANCHORS["nabla-gamma"], gamma, max(tol, 1e-8))
    report.add("nabla-epsilon", SPIN_ANCHORS["nabla-epsilon"], eps, max(tol, 1e-10))
    report.add("sprime-curvature", SPIN_ANCHORS["sprime-curvature"], direct, max(tol, 1e-6))
    report.add("omega-star-pi", SPIN_ANCHORS["omega-star-pi"], conjugate, max(tol, 1e-6))
    report.add("conformal-shift", SPIN_ANCHORS["conformal-shift"], shift, max(tol, 1e-8))
    return report
