"""
The total space S' minus the zero section over a 4-dimensional geometry.

Points are 8 real numbers p = (x^0..x^3, Re pi0', Im pi0', Re pi1', Im pi1') and
every matrix below uses that order. Complex structures act on vectors
(J[k, j] = J^k_j), 2-forms are antisymmetric matrices (w(V, W) = V^T w W) and
covectors are rows.

Frame data comes from the real coframe C with rows
theta^0..theta^3, Re dpi0, Im dpi0, Re dpi1, Im dpi1 (dpi = delta pi), so a field
that is block diagonal in the adapted splitting is C^-1 B C.
"""

from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, Optional

import numpy as np
import jax
import jax.numpy as jnp
import jax.scipy.linalg as jsl

import spinor_algebra as sa
from base_geometry import (
    ChartedGeometry,
    _coframe,
    _frame,
    conformal_rescale,
    curvature,
    einstein_lambda,
    sample_points,
    special_defining_check,
    validated_point,
)
from derivatives import check_mode, christoffel_symbols, exterior_derivative_1form, exterior_derivative_2form, jacobian, riemann_tensor
from errors import InvalidConfig, ZeroLambda
from forms import eigenspace, interior, max_abs, nijenhuis, signature, span_residual, wedge
from reports import DEFAULT_SEED, VerificationReport
from spin_bundle import _delta_pi_rows, require_asd_einstein

FIBER_COMPLEX_UNIT = np.kron(np.eye(2), sa.COMPLEX_UNIT_REAL)
SHRINKING_STEPS = 5
SHRINKING_START = 0.05


@dataclass(frozen=True)
class TwistorPoint:
    x: np.ndarray   # base point
    pi: np.ndarray  # primed spinor, nonzero

    @property
    def coordinates(self) -> np.ndarray:
        return np.concatenate([self.x, np.stack([self.pi.real, self.pi.imag], axis=1).ravel()])

    @classmethod
    def from_coordinates(cls, p) -> "TwistorPoint":
        p = np.asarray(p, dtype=float).reshape(8)
        return cls(x=p[:4].copy(), pi=p[4::2] + 1j * p[5::2])


@dataclass(frozen=True)
class TotalMetric:
    metric: np.ndarray   # g~, real symmetric 8x8
    omega: np.ndarray    # omega~, complex antisymmetric 8x8
    omega_J: np.ndarray  # omega~_J, real antisymmetric 8x8


@dataclass(frozen=True)
class AmbientValues:
    metric: np.ndarray
    structure_I: np.ndarray
    structure_J: np.ndarray
    tau: np.ndarray
    omega: np.ndarray
    omega_J: np.ndarray
    potential: float


# ---------------------------------------------------------------------------
# Traced kernels
# ---------------------------------------------------------------------------

def _pi(p):
    return p[4::2] + 1j * p[5::2]


def _norm(p):
    return jnp.sum(p[4:] ** 2)


def _pad(rows):
    """Base covectors (..., 4) extended by zeros on the fiber slots."""
    return jnp.concatenate([rows, jnp.zeros(rows.shape[:-1] + (4,), dtype=rows.dtype)], axis=-1)


def _real_coframe(geom: ChartedGeometry, p):
    delta = _delta_pi_rows(geom, p)
    vertical = jnp.stack([delta[0].real, delta[0].imag, delta[1].real, delta[1].imag])
    return jnp.concatenate([_pad(_coframe(geom, p[:4])), vertical])


def _adapted(geom: ChartedGeometry, p, horizontal, vertical):
    C = _real_coframe(geom, p)
    return jnp.linalg.solve(C, jsl.block_diag(horizontal, vertical) @ C)


def _structure_I(geom: ChartedGeometry, p):
    return _adapted(geom, p, sa._tangent_action(sa._endo_I(_pi(p))), FIBER_COMPLEX_UNIT)


def _structure_J(geom: ChartedGeometry, p):
    return _adapted(geom, p, sa._tangent_action(sa._endo_J(_pi(p))), sa.SIGMA_REAL)


def _structure_K(geom: ChartedGeometry, p):
    return _structure_I(geom, p) @ _structure_J(geom, p)


def _tau(geom: ChartedGeometry, p):
    return sa._lower(_pi(p)) @ _delta_pi_rows(geom, p)


def _horizontal_pair(lam, first, second):
    """Lambda eps_AB first_A' second_B' as frame components c[a, b]."""
    return lam * jnp.einsum("aAP,bBQ,AB,P,Q->ab", sa.SOLDERING, sa.SOLDERING, sa.EPSILON, first, second)


def _omega_tilde(geom: ChartedGeometry, lam, p):
    pi = _pi(p)
    delta = _delta_pi_rows(geom, p)
    theta = _pad(_coframe(geom, p[:4]))
    c = _horizontal_pair(lam, sa._lower(pi), sa._lower(pi))
    vertical = 2.0 * (jnp.outer(delta[0], delta[1]) - jnp.outer(delta[1], delta[0]))
    return vertical + theta.T @ (c - c.T) @ theta


def _omega_J(geom: ChartedGeometry, lam, p):
    pi = _pi(p)
    delta = _delta_pi_rows(geom, p)
    theta = _pad(_coframe(geom, p[:4]))
    c = _horizontal_pair(lam, sa._lower(pi), sa._lower(sa._sigma(pi)))
    vertical = 1j * (jnp.einsum("Am,An->mn", delta, jnp.conj(delta)) - jnp.einsum("Am,An->mn", jnp.conj(delta), delta))
    return jnp.real(vertical - 1j * theta.T @ (c - c.T) @ theta)


def _omega_J_definition(omega, structure_J):
    """omega_J(V, W) = -i/2 (omega(V, J W) - omega(W, J V))."""
    twisted = omega @ structure_J
    return jnp.real(-0.5j * (twisted - twisted.T))


def _metric(geom: ChartedGeometry, lam, p):
    delta = _delta_pi_rows(geom, p)
    theta = _pad(_coframe(geom, p[:4]))
    vertical = 2.0 * jnp.real(jnp.einsum("Am,An->mn", delta, jnp.conj(delta)))
    return lam * _norm(p) * theta.T @ theta + vertical


def _ddc(potential: Callable, structure: Callable, p, mode: str = "dual"):
    """dd^c f with d^c f = -1/2 df o I."""
    return exterior_derivative_1form(lambda q: -0.5 * jax.grad(potential)(q) @ structure(q), p, mode)


def _levi_civita(geom: ChartedGeometry, lam, p):
    return christoffel_symbols(partial(_metric, geom, lam), p)


def _parallel_residuals(geom: ChartedGeometry, lam, p, mode: str = "dual"):
    gamma = _levi_civita(geom, lam, p)

    def nabla_endo(field):
        value, d_value = field(p), jacobian(field, mode)(p)
        return (jnp.einsum("kjm->mkj", d_value) + jnp.einsum("kml,lj->mkj", gamma, value)
                - jnp.einsum("lmj,kl->mkj", gamma, value))

    omega = partial(_omega_tilde, geom, lam)
    d_omega = jacobian(omega, mode)(p)
    w = omega(p)
    nabla_omega = (jnp.einsum("ijm->mij", d_omega) - jnp.einsum("lmi,lj->mij", gamma, w)
                   - jnp.einsum("lmj,il->mij", gamma, w))
    return nabla_endo(partial(_structure_J, geom)), nabla_endo(partial(_structure_K, geom)), nabla_omega


def _riemann_lowered(geom: ChartedGeometry, lam, p, mode: str = "dual"):
    """R~[m, n, r, s] = g~_rq R~^q_smn: 2-form slots first."""
    coordinate = riemann_tensor(partial(_levi_civita, geom, lam), p, mode)
    return jnp.einsum("rq,qsmn->mnrs", _metric(geom, lam, p), coordinate)


def _hessian_norm(geom: ChartedGeometry, lam, p):
    gamma = _levi_civita(geom, lam, p)
    return jax.hessian(_norm)(p) - jnp.einsum("kmn,k->mn", gamma, jax.grad(_norm)(p))


def _r_spinor(geom: ChartedGeometry, r: Callable, x):
    r_frame = jax.grad(r)(x) @ _frame(geom, x)
    return jnp.einsum("eEC,e->EC", sa.SOLDERING_INVERSE, r_frame)


def _tau_r(geom: ChartedGeometry, r: Callable, p):
    """r pi_B' dpi^B' - eps_A'E' r_EC' pi^A' pi^C' theta^EE' (smooth across r = 0)."""
    x, pi = p[:4], _pi(p)
    p_low = sa._lower(pi)
    theta_spinor = jnp.einsum("bEP,bm->EPm", sa.SOLDERING, _coframe(geom, x))
    correction = jnp.einsum("P,EC,C,EPm->m", p_low, _r_spinor(geom, r, x), pi, theta_spinor)
    return r(x) * p_low @ _delta_pi_rows(geom, p) - _pad(correction)


def _omega_r(geom: ChartedGeometry, r: Callable, p):
    return exterior_derivative_1form(partial(_tau_r, geom, r), p)


def _omega_J_r(geom: ChartedGeometry, r: Callable, p):
    return _omega_J_definition(_omega_r(geom, r, p), _structure_J(geom, p))


def _metric_r(geom: ChartedGeometry, r: Callable, p):
    return _omega_J_r(geom, r, p) @ _structure_I(geom, p)


def _potential_r(r: Callable, p):
    return _norm(p) * r(p[:4])


def _ambient(geom: ChartedGeometry, r: Callable, p):
    omega = _omega_r(geom, r, p)
    structure_I, structure_J = _structure_I(geom, p), _structure_J(geom, p)
    omega_J = _omega_J_definition(omega, structure_J)
    return (omega_J @ structure_I, structure_I, structure_J, _tau_r(geom, r, p), omega, omega_J,
            _potential_r(r, p))


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def twistor_point(geom: ChartedGeometry, p) -> np.ndarray:
    """
    Validate a total-space point and return its 8 real coordinates.

    Raises:
        DegenerateMetric: If the metric is unusable at the base point
        ZeroSpinor: If pi vanishes
    """
    if isinstance(p, TwistorPoint):
        p = p.coordinates
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != 8:
        raise InvalidConfig(f"A total-space point has 8 real coordinates, got {p.shape[0]}.")
    validated_point(geom, p[:4])
    sa.require_nonzero(p[4::2] + 1j * p[5::2])
    return p


def sample_twistor_points(geom: ChartedGeometry, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Seeded base points from sample_points plus Gaussian spinors with |pi| >= 0.3."""
    base = sample_points(geom, count, seed)
    rng = np.random.default_rng(seed + 7)
    points = []
    for x in base:
        while True:
            pi = rng.normal(size=4)
            if np.linalg.norm(pi) >= 0.3:
                break
        points.append(np.concatenate([x, pi]))
    return np.array(points)


def resolve_twistor_samples(geom: ChartedGeometry, samples, seed: int = DEFAULT_SEED) -> np.ndarray:
    if isinstance(samples, (int, np.integer)):
        return sample_twistor_points(geom, int(samples), seed)
    return np.atleast_2d(np.asarray(samples, dtype=float))


def structure_I(geom: ChartedGeometry, p) -> np.ndarray:
    """
    The complex structure I: -i eigenspace spanned by the lifted alpha-plane of [pi]
    and the antiholomorphic fiber directions.
    """
    p = twistor_point(geom, p)
    return np.asarray(geom.kernel("structure-I", partial(_structure_I, geom))(p))


def structure_J(geom: ChartedGeometry, p) -> np.ndarray:
    """J_pi on horizontal vectors, sigma on the fiber."""
    p = twistor_point(geom, p)
    return np.asarray(geom.kernel("structure-J", partial(_structure_J, geom))(p))


def structure_K(geom: ChartedGeometry, p) -> np.ndarray:
    return structure_I(geom, p) @ structure_J(geom, p)


def euler_field(p) -> np.ndarray:
    """The (1,0) Euler field pi^A' d/dpi^A' as a complex vector on the 8 real coordinates."""
    p = np.asarray(p, dtype=float).reshape(8)
    pi = p[4::2] + 1j * p[5::2]
    vertical = np.stack([0.5 * pi, -0.5j * pi], axis=1).ravel()
    return np.concatenate([np.zeros(4, dtype=complex), vertical])


def fiber_dilation(s: float, p) -> np.ndarray:
    """delta_s(x, pi) = (x, s pi)."""
    p = np.asarray(p, dtype=float).reshape(8)
    return np.concatenate([p[:4], s * p[4:]])


def forms_tau_omega(geom: ChartedGeometry, p):
    """
    The holomorphic 1-form tau~ = pi_B' dpi^B' and omega~ = d tau~.

    Returns:
        (tau, omega): complex covector (8,) and complex antisymmetric (8, 8)

    Raises:
        NotASDEinstein: If the base is not anti-self-dual Einstein
    """
    p = twistor_point(geom, p)
    require_asd_einstein(geom, p[:4])
    lam = einstein_lambda(geom)
    tau = np.asarray(geom.kernel("tau", partial(_tau, geom))(p))
    omega = np.asarray(geom.kernel("omega-tilde", partial(_omega_tilde, geom, lam))(p))
    return tau, omega


def metric_tilde_g(geom: ChartedGeometry, p) -> TotalMetric:
    """
    g~ = 2 sigma_A'B' dpi^A' . conj(dpi^B') + Lambda |pi|^2 g_ab theta^a . theta^b.

    Raises:
        NotASDEinstein: If the base is not anti-self-dual Einstein
        ZeroLambda: If Lambda = 0 (g~ degenerates)
    """
    p = twistor_point(geom, p)
    lam = einstein_lambda(geom)
    if abs(lam) < 1e-12:
        raise ZeroLambda(
            f"Geometry '{geom.name}' has Lambda = 0; the metric g~ is degenerate on horizontal vectors.\n"
            "Pick an Einstein geometry with nonzero scalar curvature."
        )
    require_asd_einstein(geom, p[:4])
    _, omega = forms_tau_omega(geom, p)
    metric = np.asarray(geom.kernel("metric", partial(_metric, geom, lam))(p))
    omega_J = np.asarray(geom.kernel("omega-J", partial(_omega_J, geom, lam))(p))
    return TotalMetric(metric=metric, omega=omega, omega_J=omega_J)


def adapted_frame(geom: ChartedGeometry, p) -> np.ndarray:
    """Columns: horizontal lifts h_a of the frame vectors, then the duals of Re/Im dpi^A'."""
    p = twistor_point(geom, p)
    return np.linalg.inv(np.asarray(geom.kernel("real-coframe", partial(_real_coframe, geom))(p)))


def ambient_family(geomX: ChartedGeometry, r: Callable, p) -> AmbientValues:
    """
    The ambient data (g~[r], I_r, J_r, tau~_r, r~) over a compactified geometry.

    tau~_r is evaluated in its extended form, so the point may sit on either side
    of r = 0; only the compactified metric's spin connection is used.

    Raises:
        DegenerateMetric: If the compactified metric is unusable at x
    """
    p = twistor_point(geomX, p)
    values = geomX.kernel(("ambient", id(r)), partial(_ambient, geomX, r))(p)
    metric, s_I, s_J, tau, omega, omega_J, potential = (np.asarray(v) for v in values)
    return AmbientValues(metric=metric, structure_I=s_I, structure_J=s_J, tau=tau, omega=omega,
                         omega_J=omega_J, potential=float(potential))


def interior_geometry(geomX: ChartedGeometry, r: Callable) -> ChartedGeometry:
    """g+ = r^-2 gX on the same chart (used away from r = 0)."""
    metric = geomX.metric
    return ChartedGeometry(
        name=f"{geomX.name}-interior",
        metric=lambda x: metric(x) / r(x) ** 2,
        lower=geomX.lower,
        upper=geomX.upper,
        orientation=geomX.orientation,
        lambda_value=geomX.interior_lambda,
        defining_function=r,
        description=f"interior metric of {geomX.name}",
    )


def rescaled_defining(r: Callable, upsilon: Callable) -> Callable:
    return lambda x: jnp.exp(upsilon(x)) * r(x)


def dilation_map(upsilon: Callable) -> Callable:
    """(x, pi^) -> (x, e^(U/2) pi^): the r^-chart of e^(2U) gX to the r-chart of gX."""
    def mapping(p):
        return jnp.concatenate([p[:4], jnp.exp(0.5 * upsilon(p[:4])) * p[4:]])
    return mapping


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

ANCHORS = {
    "nijenhuis-I": "I is integrable (Nijenhuis tensor vanishes)",
    "nijenhuis-J": "J is integrable (Nijenhuis tensor vanishes)",
    "anticommute-IJ": "IJ = -JI with I^2 = J^2 = -1",
    "K-square": "K = IJ squares to -1",
    "d-tau-omega": "d tau~ = omega~",
    "euler-identity": "E contracted into omega~^2 = 4 tau~ ^ d tau~, tau~(E) = 0",
    "omega-2-0": "omega~ is a (2,0)-form for I",
    "ddc-potential": "i ddbar |pi|^2 = omega~_J",
    "d-omega-J": "omega~_J is closed",
    "omega-J-invariance": "omega~_J is I-invariant",
    "metric-compat": "g~ = omega~_J(., I .) is compatible with I, J and K",
    "nabla-J": "J is parallel for g~",
    "nabla-K": "K is parallel for g~",
    "nabla-omega": "omega~ is parallel for g~",
    "ricci": "g~ is Ricci-flat",
    "hessian-horizontal": "nabla_a nabla_b |pi|^2 = Lambda |pi|^2 g_ab",
    "hessian-mixed": "nabla_alpha nabla_betabar |pi|^2 = g~, nabla_alpha nabla_beta |pi|^2 = 0",
    "signature": "g~ is definite for Lambda > 0 and neutral for Lambda < 0",
    "non-horizontal": "curvature of g~ vanishes off the horizontal block",
    "horizontal-vs-weyl": "horizontal curvature of g~ = Lambda |pi|^2 W-",
    "ddc-r-tilde": "i ddbar r~ = omega~_J_r",
    "interior-cross": "g~[r] = (r/|r|) delta_|r|* g~_+ away from r = 0",
    "shrinking-r": "i ddbar r~ = omega~_J_r as |r| -> 0",
    "dilation-metric": "dilations are isometries g~[e^U r] = delta* g~[r]",
    "dilation-I": "dilations are holomorphic for I_r",
    "dilation-J": "dilations preserve J_r",
    "homogeneity": "r~ and g~[r] are homogeneous of degree (1,1)",
    "special-defining": "r is a special defining function",
}


def _new_report(suite: str, geom: ChartedGeometry, seed: int, mode: str, tolerances) -> VerificationReport:
    check_mode(mode)
    return VerificationReport(suite, geom.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))


def integrability_check(geom: ChartedGeometry, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                        mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """Suite: Nijenhuis tensors of I and J, the quaternion relations and the tau~/omega~ identities."""
    report = _new_report("integrability", geom, seed, mode, tolerances)
    points = resolve_twistor_samples(geom, samples, seed)
    lam = einstein_lambda(geom)
    s_I = geom.kernel("structure-I", partial(_structure_I, geom))
    s_J = geom.kernel("structure-J", partial(_structure_J, geom))
    d_I = geom.kernel(("d-structure-I", mode), jacobian(partial(_structure_I, geom), mode))
    d_J = geom.kernel(("d-structure-J", mode), jacobian(partial(_structure_J, geom), mode))
    tau = geom.kernel("tau", partial(_tau, geom))
    omega = geom.kernel("omega-tilde", partial(_omega_tilde, geom, lam))
    d_tau = geom.kernel(("d-tau", mode), lambda q: exterior_derivative_1form(partial(_tau, geom), q, mode))

    results = {name: [] for name in ("nijenhuis-I", "nijenhuis-J", "anticommute-IJ", "K-square",
                                     "d-tau-omega", "euler-identity", "omega-2-0")}
    eye = np.eye(8)
    for p in points:
        p = twistor_point(geom, p)
        I, J = np.asarray(s_I(p)), np.asarray(s_J(p))
        K = I @ J
        results["nijenhuis-I"].append(max_abs(nijenhuis(I, np.asarray(d_I(p)))))
        results["nijenhuis-J"].append(max_abs(nijenhuis(J, np.asarray(d_J(p)))))
        results["anticommute-IJ"].append(max(max_abs(I @ J + J @ I), max_abs(I @ I + eye), max_abs(J @ J + eye)))
        results["K-square"].append(max_abs(K @ K + eye))

        t, w = np.asarray(tau(p)), np.asarray(omega(p))
        results["d-tau-omega"].append(max_abs(np.asarray(d_tau(p)) - w))
        E = euler_field(p)
        lhs = interior(E, wedge(w, w))
        rhs = 4.0 * wedge(t, w)
        results["euler-identity"].append(max(max_abs(lhs - rhs), abs(t @ E)))
        antiholomorphic = eigenspace(I, -1j)
        results["omega-2-0"].append(max_abs(w @ antiholomorphic))

    report.add("nijenhuis-I", ANCHORS["nijenhuis-I"], results["nijenhuis-I"], max(tol, 1e-5))
    report.add("nijenhuis-J", ANCHORS["nijenhuis-J"], results["nijenhuis-J"], max(tol, 1e-5))
    report.add("anticommute-IJ", ANCHORS["anticommute-IJ"], results["anticommute-IJ"], max(tol, 1e-10))
    report.add("K-square", ANCHORS["K-square"], results["K-square"], max(tol, 1e-10))
    report.add("d-tau-omega", ANCHORS["d-tau-omega"], results["d-tau-omega"], max(tol, 1e-6))
    report.add("euler-identity", ANCHORS["euler-identity"], results["euler-identity"], max(tol, 1e-6))
    report.add("omega-2-0", ANCHORS["omega-2-0"], results["omega-2-0"], max(tol, 1e-8))
    return report


def kahler_potential_check(geom: ChartedGeometry, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                           mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Suite: dd^c |pi|^2 against the closed form of omega~_J, closedness, I-invariance
    and compatibility of g~ with I, J and K.
    """
    report = _new_report("kahler-potential", geom, seed, mode, tolerances)
    points = resolve_twistor_samples(geom, samples, seed)
    lam = einstein_lambda(geom)
    s_I = geom.kernel("structure-I", partial(_structure_I, geom))
    s_J = geom.kernel("structure-J", partial(_structure_J, geom))
    omega = geom.kernel("omega-tilde", partial(_omega_tilde, geom, lam))
    omega_J = geom.kernel("omega-J", partial(_omega_J, geom, lam))
    metric = geom.kernel("metric", partial(_metric, geom, lam))
    ddc = geom.kernel(("ddc-norm", mode), lambda q: _ddc(_norm, partial(_structure_I, geom), q, mode))
    d_omega_J = geom.kernel(("d-omega-J", mode),
                            lambda q: exterior_derivative_2form(partial(_omega_J, geom, lam), q, mode))

    potential, closed, invariance, compat = [], [], [], []
    for p in points:
        p = twistor_point(geom, p)
        I, J = np.asarray(s_I(p)), np.asarray(s_J(p))
        K = I @ J
        w_J = np.asarray(omega_J(p))
        g = np.asarray(metric(p))
        potential.append(max_abs(np.asarray(ddc(p)) - w_J))
        closed.append(max_abs(d_omega_J(p)))
        invariance.append(max_abs(I.T @ w_J @ I - w_J))
        compat.append(max(
            max_abs(w_J @ I - g),
            max_abs(np.asarray(_omega_J_definition(omega(p), J)) - w_J),
            *(max_abs(S.T @ g @ S - g) for S in (I, J, K)),
        ))
    report.add("ddc-potential", ANCHORS["ddc-potential"], potential, max(tol, 1e-5))
    report.add("d-omega-J", ANCHORS["d-omega-J"], closed, max(tol, 1e-5))
    report.add("omega-J-invariance", ANCHORS["omega-J-invariance"], invariance, max(tol, 1e-10))
    report.add("metric-compat", ANCHORS["metric-compat"], compat, max(tol, 1e-10))
    return report


def _lambda_or_skip(geom: ChartedGeometry, report: VerificationReport) -> Optional[float]:
    lam = einstein_lambda(geom)
    if abs(lam) < 1e-12:
        report.skip("Lambda = 0: g~ is degenerate")
        return None
    return lam


def hyperkahler_check(geom: ChartedGeometry, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                      mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Suite: Levi-Civita connection of g~ from its metric field; parallel J, K and omega~,
    Ricci-flatness, the two Hessian identities of |pi|^2 and the signature.
    """
    report = _new_report("hyperkahler", geom, seed, mode, tolerances)
    lam = _lambda_or_skip(geom, report)
    if lam is None:
        return report
    points = resolve_twistor_samples(geom, samples, seed)
    parallel = geom.kernel(("parallel", mode), partial(_parallel_residuals, geom, lam, mode=mode))
    riemann = geom.kernel(("riemann-tilde", mode), partial(_riemann_lowered, geom, lam, mode=mode))
    hessian = geom.kernel("hessian-norm", partial(_hessian_norm, geom, lam))
    metric = geom.kernel("metric", partial(_metric, geom, lam))
    s_I = geom.kernel("structure-I", partial(_structure_I, geom))
    frame = geom.kernel("real-coframe", partial(_real_coframe, geom))

    expected = (8, 0) if lam > 0 else (4, 4)
    results = {name: [] for name in ("nabla-J", "nabla-K", "nabla-omega", "ricci",
                                     "hessian-horizontal", "hessian-mixed", "signature")}
    observed = set()
    for p in points:
        p = twistor_point(geom, p)
        nabla_J, nabla_K, nabla_omega = (np.asarray(v) for v in parallel(p))
        results["nabla-J"].append(max_abs(nabla_J))
        results["nabla-K"].append(max_abs(nabla_K))
        results["nabla-omega"].append(max_abs(nabla_omega))
        g = np.asarray(metric(p))
        lowered = np.asarray(riemann(p))
        # Ric_ab = R_ca^c_b
        results["ricci"].append(max_abs(np.einsum("carb,cr->ab", lowered, np.linalg.inv(g))))

        H = np.asarray(hessian(p))
        horizontal = np.linalg.inv(np.asarray(frame(p)))[:, :4]
        norm = float(p[4:] @ p[4:])
        results["hessian-horizontal"].append(max_abs(horizontal.T @ H @ horizontal - lam * norm * np.eye(4)))
        holomorphic = eigenspace(np.asarray(s_I(p)), 1j)
        results["hessian-mixed"].append(max(
            max_abs(holomorphic.T @ H @ holomorphic.conj() - holomorphic.T @ g @ holomorphic.conj()),
            max_abs(holomorphic.T @ H @ holomorphic),
        ))
        sig = signature(g)
        observed.add(sig)
        results["signature"].append(0.0 if sig == expected else 1.0)

    report.add("nabla-J", ANCHORS["nabla-J"], results["nabla-J"], max(tol, 1e-4))
    report.add("nabla-K", ANCHORS["nabla-K"], results["nabla-K"], max(tol, 1e-4))
    report.add("nabla-omega", ANCHORS["nabla-omega"], results["nabla-omega"], max(tol, 1e-4))
    report.add("ricci", ANCHORS["ricci"], results["ricci"], max(tol, 1e-4))
    report.add("hessian-horizontal", ANCHORS["hessian-horizontal"], results["hessian-horizontal"], max(tol, 1e-6))
    report.add("hessian-mixed", ANCHORS["hessian-mixed"], results["hessian-mixed"], max(tol, 1e-6))
    report.add("signature", ANCHORS["signature"], results["signature"], 0.5,
               note="observed " + ", ".join(f"({a},{b})" for a, b in sorted(observed)))
    return report


def curvature_formula_check(geom: ChartedGeometry, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                            mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Suite: curvature of g~ in the adapted frame. Components with a vertical slot must
    vanish; the horizontal block must equal Lambda |pi|^2 W- of the base (relative error).
    """
    report = _new_report("curvature-formula", geom, seed, mode, tolerances)
    lam = _lambda_or_skip(geom, report)
    if lam is None:
        return report
    points = resolve_twistor_samples(geom, samples, seed)
    riemann = geom.kernel(("riemann-tilde", mode), partial(_riemann_lowered, geom, lam, mode=mode))
    frame = geom.kernel("real-coframe", partial(_real_coframe, geom))

    off_block, horizontal_error = [], []
    for p in points:
        p = twistor_point(geom, p)
        F = np.linalg.inv(np.asarray(frame(p)))
        R = np.einsum("mnrs,ma,nb,rc,sd->abcd", np.asarray(riemann(p)), F, F, F, F)
        horizontal = R[:4, :4, :4, :4]
        mask = np.ones(R.shape, dtype=bool)
        mask[:4, :4, :4, :4] = False
        off_block.append(max_abs(R[mask]))
        expected = lam * float(p[4:] @ p[4:]) * curvature(geom, p[:4], mode).weyl_minus
        horizontal_error.append(max_abs(horizontal - expected) / max(1.0, max_abs(expected)))
    report.add("non-horizontal", ANCHORS["non-horizontal"], off_block, max(tol, 1e-4))
    report.add("horizontal-vs-weyl", ANCHORS["horizontal-vs-weyl"], horizontal_error, max(tol, 1e-3))
    return report


def ddc_potential_residual(geomX: ChartedGeometry, r: Callable, p, mode: str = "dual") -> float:
    """|dd^c r~ - omega~_J_r| at p."""
    p = twistor_point(geomX, p)
    kernel = geomX.kernel(("ddc-r-tilde", id(r), mode), lambda q: (
        _ddc(partial(_potential_r, r), partial(_structure_I, geomX), q, mode) - _omega_J_r(geomX, r, q)))
    return max_abs(kernel(p))


def dilation_pushforward_check(geomX: ChartedGeometry, r: Callable, upsilon: Callable, samples=8,
                               tol: float = 1e-8, seed: int = DEFAULT_SEED, mode: str = "dual",
                               tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Suite: the dilation delta_(e^U) between the charts of r^ = e^U r and r is holomorphic
    for I, preserves J and pulls g~[r] back to g~[r^].
    """
    report = _new_report("dilation", geomX, seed, mode, tolerances)
    geom_hat = conformal_rescale(geomX, upsilon)
    r_hat = rescaled_defining(r, upsilon)
    mapping = dilation_map(upsilon)
    push = jax.jit(jax.jacfwd(mapping))
    metric_r = geomX.kernel(("metric-r", id(r)), partial(_metric_r, geomX, r))
    metric_hat = geom_hat.kernel(("metric-r", id(r_hat)), partial(_metric_r, geom_hat, r_hat))
    s_I, s_J = geomX.kernel("structure-I", partial(_structure_I, geomX)), geomX.kernel("structure-J", partial(_structure_J, geomX))
    h_I, h_J = (geom_hat.kernel("structure-I", partial(_structure_I, geom_hat)),
                geom_hat.kernel("structure-J", partial(_structure_J, geom_hat)))

    metric_res, I_res, J_res = [], [], []
    for p in resolve_twistor_samples(geomX, samples, seed):
        p = twistor_point(geomX, p)
        q = np.asarray(mapping(jnp.asarray(p)))
        D = np.asarray(push(p))
        metric_res.append(max_abs(D.T @ np.asarray(metric_r(q)) @ D - np.asarray(metric_hat(p))))
        I_res.append(span_residual(D @ eigenspace(np.asarray(h_I(p)), -1j), eigenspace(np.asarray(s_I(q)), -1j)))
        J_res.append(max_abs(D @ np.asarray(h_J(p)) - np.asarray(s_J(q)) @ D))
    report.add("dilation-metric", ANCHORS["dilation-metric"], metric_res, max(tol, 1e-6))
    report.add("dilation-I", ANCHORS["dilation-I"], I_res, max(tol, 1e-6))
    report.add("dilation-J", ANCHORS["dilation-J"], J_res, max(tol, 1e-6))
    return report


def homogeneity_residual(geomX: ChartedGeometry, r: Callable, p, s: float = 1.7) -> float:
    """max of |r~(delta_s p) - s^2 r~(p)| and |delta_s* g~[r] - s^2 g~[r]|."""
    p = twistor_point(geomX, p)
    q = fiber_dilation(s, p)
    here, there = ambient_family(geomX, r, p), ambient_family(geomX, r, q)
    scaling = np.diag([1.0] * 4 + [s] * 4)
    return max(abs(there.potential - s ** 2 * here.potential),
               max_abs(scaling @ there.metric @ scaling - s ** 2 * here.metric))


def interior_cross_residual(geomX: ChartedGeometry, r: Callable, p) -> float:
    """
    |(r/|r|) delta_|r|* g~_+ - g~[r]| at an interior point: the extended construction
    against the hyperkahler metric of g+ = r^-2 gX.
    """
    p = twistor_point(geomX, p)
    interior = interior_geometry(geomX, r)
    value = float(r(jnp.asarray(p[:4])))
    mapping = dilation_map(lambda x: jnp.log(jnp.abs(r(x))))
    q = np.asarray(mapping(jnp.asarray(p)))
    D = np.asarray(jax.jacfwd(mapping)(jnp.asarray(p)))
    pulled = np.sign(value) * D.T @ metric_tilde_g(interior, q).metric @ D
    return max_abs(pulled - ambient_family(geomX, r, p).metric)


def shrinking_points(geomX: ChartedGeometry, r: Callable, base: np.ndarray) -> np.ndarray:
    """Move base points along grad r onto |r| = 0.05 * 2^-k, k = 0..4 (alternating sides)."""
    grad_r = jax.jit(jax.grad(r))
    points = []
    for k in range(SHRINKING_STEPS):
        target = (-1) ** k * SHRINKING_START * 2.0 ** (-k)
        p = np.array(base[k % len(base)], dtype=float)
        for _ in range(8):
            x = jnp.asarray(p[:4])
            gradient = np.asarray(grad_r(x))
            p[:4] = p[:4] + (target - float(r(x))) * gradient / (gradient @ gradient)
        points.append(p)
    return np.array(points)


def ambient_family_check(geomX: ChartedGeometry, r: Callable, samples=8, tol: float = 1e-8,
                         seed: int = DEFAULT_SEED, mode: str = "dual",
                         tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Suite: the ambient metric family over a compactified geometry. Interior samples on
    both sides of r = 0, a shrinking sequence towards r = 0, dilation equivariance for
    U = 0.3 x^1, fiber homogeneity and the special defining function.
    """
    report = _new_report("ambient-family", geomX, seed, mode, tolerances)
    points = resolve_twistor_samples(geomX, samples, seed)

    ddc = [ddc_potential_residual(geomX, r, p, mode) for p in points]
    cross = [interior_cross_residual(geomX, r, p) for p in points[:2]] if geomX.interior_lambda is not None else []
    report.add("ddc-r-tilde", ANCHORS["ddc-r-tilde"], ddc, max(tol, 1e-5))
    if cross:
        report.add("interior-cross", ANCHORS["interior-cross"], cross, max(tol, 1e-5))
    shrinking = [ddc_potential_residual(geomX, r, p, mode) for p in shrinking_points(geomX, r, points)]
    report.add("shrinking-r", ANCHORS["shrinking-r"], shrinking, max(tol, 1e-5),
               note=f"|r| down to {SHRINKING_START * 2.0 ** -(SHRINKING_STEPS - 1):.4g}")

    dilation = dilation_pushforward_check(geomX, r, lambda x: 0.3 * x[1], points, tol, seed, mode, tolerances)
    report.checks.extend(dilation.checks)
    report.add("homogeneity", ANCHORS["homogeneity"], [homogeneity_residual(geomX, r, p) for p in points],
               max(tol, 1e-8))
    special = special_defining_check(geomX, r, points[:, :4], tol, seed, mode)
    report.add("special-defining", ANCHORS["special-defining"],
               [special.check("gradient-norm").max_residual, special.check("totally-geodesic").max_residual],
               max(tol, 1e-8))
    return report
