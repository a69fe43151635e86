"""
Pointwise two-spinor algebra.

Components are stored with upper indices. Lowering contracts on the second
slot of epsilon: xi_A = xi^B eps_BA. The soldering symbols are the constant
matrices of

    A(v) = 1/sqrt(2) [[v0 + i v3,  v1 + i v2],
                      [-v1 + i v2, v0 - i v3]],

so that 2 det A(v) = |v|^2 and every orthonormal frame uses the same symbols.
G[a, A, A'] is the spinor form of the frame vector e_a and
G_INV[a, A, A'] recovers frame components: v^a = sum G_INV[a, A, A'] v^{AA'}.

The helpers prefixed with an underscore are written in jax.numpy so the
total-space kernels can trace through them; the public functions validate
their input and return numpy values.
"""

from dataclasses import dataclass

import numpy as np
import jax.numpy as jnp

import derivatives  # noqa: F401  (enables 64-bit jax)
from errors import ZeroSpinor

ZERO_SPINOR_TOL = 1e-14

EPSILON = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)

SOLDERING = np.array(
    [
        [[1.0, 0.0], [0.0, 1.0]],
        [[0.0, 1.0], [-1.0, 0.0]],
        [[0.0, 1.0j], [1.0j, 0.0]],
        [[1.0j, 0.0], [0.0, -1.0j]],
    ],
    dtype=complex,
) / np.sqrt(2.0)

# Inverse of the 4x4 map v^a -> v^{AA'}.
SOLDERING_INVERSE = np.linalg.inv(SOLDERING.reshape(4, 4).T).reshape(4, 2, 2)

# Real form of sigma on (Re pi0, Im pi0, Re pi1, Im pi1).
SIGMA_REAL = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)

# Multiplication by i on one complex component written as (Re, Im).
COMPLEX_UNIT_REAL = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class AlphaPlaneBasis:
    """Two complex frame vectors gamma(xi_k (x) pi) spanning the alpha-plane of [pi]."""

    vectors: np.ndarray  # shape (2, 4)

    def gram(self) -> np.ndarray:
        """Complex-bilinear inner products g(u, w) in the orthonormal frame."""
        return self.vectors @ self.vectors.T


def as_spinor(pi) -> np.ndarray:
    spinor = np.asarray(pi, dtype=complex).reshape(2)
    if not np.all(np.isfinite(spinor)):
        raise ZeroSpinor(f"Spinor has non-finite components: {spinor}")
    return spinor


def require_nonzero(pi) -> np.ndarray:
    spinor = as_spinor(pi)
    if np.linalg.norm(spinor) < ZERO_SPINOR_TOL:
        raise ZeroSpinor(
            f"Primed spinor must be nonzero, got {spinor}.\n"
            "Points of the twistor space live over pi != 0; pick another fiber point."
        )
    return spinor


def _sigma(pi):
    return jnp.stack([jnp.conj(pi[1]), -jnp.conj(pi[0])])


def _lower(xi):
    return xi @ EPSILON


def _norm_squared(pi):
    return jnp.real(pi[0] * jnp.conj(pi[0]) + pi[1] * jnp.conj(pi[1]))


def _endo_I(pi):
    # M[A', B'] = I_{B'}^{A'}
    s = _sigma(pi)
    outer = jnp.outer(s, _lower(pi)) + jnp.outer(pi, _lower(s))
    return (-1j / _norm_squared(pi)) * outer


def _endo_J(pi):
    s = _sigma(pi)
    outer = jnp.outer(pi, _lower(pi)) + jnp.outer(s, _lower(s))
    return (-1.0 / _norm_squared(pi)) * outer


def _tangent_action(matrix):
    """Real 4x4 frame matrix of v^{AA'} -> v^{AB'} X_{B'}^{A'}."""
    return jnp.real(jnp.einsum("aAP,bAQ,PQ->ab", SOLDERING_INVERSE, SOLDERING, matrix))


def sigma_apply(pi) -> np.ndarray:
    """The quaternionic structure (a, b) -> (conj b, -conj a)."""
    return np.asarray(_sigma(as_spinor(pi)))


def norm_squared(pi) -> float:
    return float(_norm_squared(as_spinor(pi)))


def lower_index(xi) -> np.ndarray:
    return np.asarray(_lower(as_spinor(xi)))


def raise_index(xi_lower) -> np.ndarray:
    return EPSILON @ as_spinor(xi_lower)


def epsilon_form(xi1, xi2) -> complex:
    """eps(xi1, xi2) = eps_AB xi1^A xi2^B."""
    return complex(as_spinor(xi1) @ EPSILON @ as_spinor(xi2))


def realify(matrix: np.ndarray) -> np.ndarray:
    """Real form of a complex-linear map on C^n in the (Re z0, Im z0, Re z1, ...) ordering."""
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    real = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            m = matrix[i, j]
            real[2 * i:2 * i + 2, 2 * j:2 * j + 2] = [[m.real, -m.imag], [m.imag, m.real]]
    return real


def endo_I(pi) -> np.ndarray:
    """
    The endomorphism I_{B'}^{A'} of S' with pi as -i eigenvector and sigma(pi) as +i eigenvector.

    Returns:
        2x2 complex matrix M with M[A', B'] = I_{B'}^{A'}

    Raises:
        ZeroSpinor: If pi vanishes
    """
    return np.asarray(_endo_I(require_nonzero(pi)))


def endo_J(pi) -> np.ndarray:
    """
    The endomorphism J_{B'}^{A'} (J pi = -sigma pi, J sigma pi = pi) as a real 4x4 matrix
    on (Re pi0, Im pi0, Re pi1, Im pi1).

    Raises:
        ZeroSpinor: If pi vanishes
    """
    return realify(np.asarray(_endo_J(require_nonzero(pi))))


def endo_J_complex(pi) -> np.ndarray:
    return np.asarray(_endo_J(require_nonzero(pi)))


def tangent_action(matrix) -> np.ndarray:
    """Frame matrix of the induced endomorphism of TX."""
    return np.asarray(_tangent_action(jnp.asarray(matrix)))


def alpha_plane(pi) -> AlphaPlaneBasis:
    """
    Basis of the alpha-plane {xi (x) pi} in orthonormal frame components.

    Raises:
        ZeroSpinor: If pi vanishes
    """
    spinor = require_nonzero(pi)
    vectors = np.einsum("aAP,kA,P->ka", SOLDERING_INVERSE, np.eye(2), spinor)
    return AlphaPlaneBasis(vectors=vectors)


def sigma_pi_identity_residual(pi) -> float:
    """Residual of 2 (sigma pi)_[A' pi_B'] = |pi|^2 eps_A'B'."""
    spinor = require_nonzero(pi)
    s_low = lower_index(sigma_apply(spinor))
    p_low = lower_index(spinor)
    lhs = np.outer(s_low, p_low) - np.outer(p_low, s_low)
    return float(np.max(np.abs(lhs - norm_squared(spinor) * EPSILON)))


def vector_to_spinor(v: np.ndarray) -> np.ndarray:
    """Frame components v^a -> v^{AA'}."""
    return np.einsum("a,aAP->AP", v, SOLDERING)


def spinor_to_vector(v_spinor: np.ndarray) -> np.ndarray:
    return np.einsum("aAP,AP->a", SOLDERING_INVERSE, v_spinor)


def frame_to_spinor_4(tensor: np.ndarray) -> np.ndarray:
    """Covariant frame 4-tensor T_abcd -> T_{AA'BB'CC'DD'} (index order A A' B B' C C' D D')."""
    gi = SOLDERING_INVERSE
    return np.einsum("aAP,bBQ,cCR,dDS,abcd->APBQCRDS", gi, gi, gi, gi, tensor)


def spinor_to_frame_4(tensor: np.ndarray) -> np.ndarray:
    g = SOLDERING
    return np.einsum("aAP,bBQ,cCR,dDS,APBQCRDS->abcd", g, g, g, g, tensor)


def frame_to_spinor_2(tensor: np.ndarray) -> np.ndarray:
    gi = SOLDERING_INVERSE
    return np.einsum("aAP,bBQ,ab->APBQ", gi, gi, tensor)


def _spinor_volume() -> np.ndarray:
    e = EPSILON
    first = np.einsum("AC,BD,PS,QR->APBQCRDS", e, e, e, e)
    second = np.einsum("AD,BC,PR,QS->APBQCRDS", e, e, e, e)
    return first - second


def volume_tensor() -> np.ndarray:
    """Frame components e_abcd of the spinor volume form (e_0123 = -1 with these symbols)."""
    return np.real(spinor_to_frame_4(_spinor_volume()))


def reassemble_riemann(psi, psi_tilde, phi, lam) -> np.ndarray:
    """
    Frame Riemann tensor R_abcd from its curvature spinors.

    Args:
        psi: Psi[A, B, C, D]
        psi_tilde: Psi~[A', B', C', D']
        phi: Phi[A, B, A', B']
        lam: Lambda = R / 24
    """
    e = EPSILON
    spinor = (
        np.einsum("ABCD,PQ,RS->APBQCRDS", psi, e, e)
        + np.einsum("PQRS,AB,CD->APBQCRDS", psi_tilde, e, e)
        + np.einsum("ABRS,PQ,CD->APBQCRDS", phi, e, e)
        + np.einsum("CDPQ,AB,RS->APBQCRDS", phi, e, e)
        + lam * (
            np.einsum("AC,BD,PQ,RS->APBQCRDS", e, e, e, e)
            + np.einsum("AD,BC,PQ,RS->APBQCRDS", e, e, e, e)
            + np.einsum("PR,QS,AB,CD->APBQCRDS", e, e, e, e)
            + np.einsum("PS,QR,AB,CD->APBQCRDS", e, e, e, e)
        )
    )
    return np.real(spinor_to_frame_4(spinor))


VOLUME = volume_tensor()
