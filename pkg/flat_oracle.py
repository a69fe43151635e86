"""
Closed-form flat model of the ambient construction.

Over the compactified hyperbolic slab (flat metric, r = x^0) the map
    F~(x, pi) = (x^{AA'} pi_A', pi_A') in C^4 \\ C^2
carries I_r to the standard complex structure, J_r to w -> (w1bar, -w0bar, w3bar, -w2bar),
tau~_r to (W0 dW3 - W3 dW0 + W2 dW1 - W1 dW2)/sqrt(2) and g~[r] to the constant neutral
metric sqrt(2)(dW0.dW2bar + dW2.dW0bar + dW1.dW3bar + dW3.dW1bar).

Real coordinates on C^4 are (Re W0, Im W0, ..., Re W3, Im W3) throughout.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
import jax
import jax.numpy as jnp
import scipy.linalg

import spinor_algebra as sa
from base_geometry import ChartedGeometry
from derivatives import check_mode
from errors import ZeroSpinor
from forms import eigenspace, max_abs
from reports import DEFAULT_SEED, VerificationReport
from twistor_total_space import ambient_family, resolve_twistor_samples, twistor_point

FLAT_MODEL = "hyperbolic-compactified"
SQRT2 = np.sqrt(2.0)

# Multiplication by i on C^4 in real coordinates.
STANDARD_COMPLEX = np.kron(np.eye(4), sa.COMPLEX_UNIT_REAL)


@dataclass(frozen=True)
class WPoint:
    w: np.ndarray  # (W0, W1, W2, W3)

    @property
    def coordinates(self) -> np.ndarray:
        return np.stack([self.w.real, self.w.imag], axis=1).ravel()

    @property
    def in_range(self) -> bool:
        return bool(np.linalg.norm(self.w[2:]) > sa.ZERO_SPINOR_TOL)

    @classmethod
    def from_coordinates(cls, coordinates) -> "WPoint":
        coordinates = np.asarray(coordinates, dtype=float).reshape(8)
        return cls(w=coordinates[0::2] + 1j * coordinates[1::2])


def _spinor_position(x):
    """x^{AA'} = sum_a x^a gamma_a^{AA'}."""
    return jnp.einsum("aAP,a->AP", sa.SOLDERING, x)


def _flat_map(p):
    pi_low = sa._lower(p[4::2] + 1j * p[5::2])
    w = jnp.concatenate([_spinor_position(p[:4]) @ pi_low, pi_low])
    return jnp.stack([w.real, w.imag], axis=1).ravel()


_flat_map_jacobian = jax.jit(jax.jacfwd(_flat_map))


def flat_map_F(x, pi) -> WPoint:
    """
    (x, pi) -> (x^{AA'} pi_A', pi_A').

    Raises:
        ZeroSpinor: If pi vanishes
    """
    pi = sa.require_nonzero(pi)
    x = np.asarray(x, dtype=float).reshape(4)
    p = np.concatenate([x, np.stack([pi.real, pi.imag], axis=1).ravel()])
    return WPoint.from_coordinates(np.asarray(_flat_map(jnp.asarray(p))))


def flat_map_F_inverse(point: WPoint):
    """
    Recover (x, pi) from W with (W2, W3) != 0: pi = (W3, -W2) and x from the 4x4 real system.

    Raises:
        ZeroSpinor: If (W2, W3) = 0 (outside the range of F~)
    """
    if not point.in_range:
        raise ZeroSpinor(
            f"W = {point.w} has (W2, W3) = 0 and is not in the range of F~.\n"
            "The flat map only reaches C^4 minus the plane W2 = W3 = 0."
        )
    pi_low = point.w[2:]
    columns = np.einsum("aAP,P->aA", sa.SOLDERING, pi_low)
    system = np.vstack([columns.real.T, columns.imag.T])
    rhs = np.concatenate([point.w[:2].real, point.w[:2].imag])
    x = scipy.linalg.solve(system, rhs)
    return x, sa.raise_index(pi_low)


def flat_J(vector) -> np.ndarray:
    """(w0, w1, w2, w3) -> (w1bar, -w0bar, w3bar, -w2bar) on a real tangent 8-vector."""
    vector = np.asarray(vector)
    w = vector[0::2] + 1j * vector[1::2]
    image = np.conj(np.stack([w[1], -w[0], w[3], -w[2]]))
    return np.stack([image.real, image.imag], axis=1).ravel()


def flat_J_matrix() -> np.ndarray:
    return np.column_stack([flat_J(e) for e in np.eye(8)])


def flat_ambient_metric() -> np.ndarray:
    """sqrt(2)(dW0.dW2bar + dW2.dW0bar + dW1.dW3bar + dW3.dW1bar) as a real 8x8 matrix."""
    pairing = np.zeros((4, 4))
    pairing[0, 2] = pairing[2, 0] = pairing[1, 3] = pairing[3, 1] = SQRT2
    return np.kron(pairing, np.eye(2))


def flat_omega_J() -> np.ndarray:
    """Kaehler form with g = omega_J(., I .) for the standard complex structure."""
    return -flat_ambient_metric() @ STANDARD_COMPLEX


def flat_potential(point: WPoint) -> float:
    """r~ = (W0 W2bar + W2 W0bar + W1 W3bar + W3 W1bar) / sqrt(2)."""
    w = point.w
    return float(SQRT2 * np.real(w[0] * np.conj(w[2]) + w[1] * np.conj(w[3])))


def flat_tau_r(point: WPoint) -> np.ndarray:
    """(W0 dW3 - W3 dW0 + W2 dW1 - W1 dW2) / sqrt(2) as a complex covector on real coordinates."""
    w = point.w
    coefficients = np.array([-w[3], w[2], -w[1], w[0]]) / SQRT2
    return np.stack([coefficients, 1j * coefficients], axis=1).ravel()


def on_hyperquadric(point: WPoint, tol: float = 1e-10) -> bool:
    """Re(W0 W2bar + W1 W3bar) = 0: the image of the boundary slice."""
    w = point.w
    return abs(np.real(w[0] * np.conj(w[2]) + w[1] * np.conj(w[3]))) <= tol


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

ANCHORS = {
    "metric-pullback": "F~* of the flat metric sqrt(2)(dW0.dW2bar + ...) equals g~[r]",
    "J-pushforward": "F~_* J_r = (w1bar, -w0bar, w3bar, -w2bar) F~_*",
    "potential": "r~ o F~ = |pi|^2 x^0",
    "tau-pullback": "F~* (W0 dW3 - W3 dW0 + W2 dW1 - W1 dW2)/sqrt(2) = tau~_r",
    "holomorphic-F": "F~_* maps the -i eigenspace of I_r into T^(0,1) C^4",
}


def flat_oracle_residuals(geomX: ChartedGeometry, r: Callable, p) -> Dict[str, float]:
    """Per-point residuals of the pipeline's ambient data against the closed forms."""
    p = twistor_point(geomX, p)
    ambient = ambient_family(geomX, r, p)
    jac = np.asarray(_flat_map_jacobian(jnp.asarray(p)))
    image = WPoint.from_coordinates(np.asarray(_flat_map(jnp.asarray(p))))

    pushed = jac @ eigenspace(ambient.structure_I, -1j)
    holomorphic = pushed[0::2] + 1j * pushed[1::2]
    return {
        "metric-pullback": max_abs(jac.T @ flat_ambient_metric() @ jac - ambient.metric),
        "J-pushforward": max_abs(jac @ ambient.structure_J - flat_J_matrix() @ jac),
        "potential": abs(flat_potential(image) - ambient.potential),
        "tau-pullback": max_abs(flat_tau_r(image) @ jac - ambient.tau),
        "holomorphic-F": max_abs(holomorphic) / max(1.0, max_abs(pushed)),
    }


def flat_oracle_check(geomX: ChartedGeometry, r: Callable, samples=8, tol: float = 1e-8,
                      seed: int = DEFAULT_SEED, mode: str = "dual",
                      tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """Suite: closed-form flat model against ambient_family on the compactified hyperbolic slab."""
    check_mode(mode)
    report = VerificationReport("flat-oracle", geomX.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    if geomX.name != FLAT_MODEL:
        return report.skip(f"the flat oracle is only known for {FLAT_MODEL}")

    residuals = {check: [] for check in ANCHORS}
    for p in resolve_twistor_samples(geomX, samples, seed):
        for check, value in flat_oracle_residuals(geomX, r, p).items():
            residuals[check].append(value)
    defaults = {"metric-pullback": 1e-6}
    for check, anchor in ANCHORS.items():
        report.add(check, anchor, residuals[check], max(tol, defaults.get(check, 1e-8)))
    return report
