"""
Twistor CR structure over a conformal 3-manifold (Sigma, [h]).

The null cone M^ = {zeta in CT*Sigma : h(zeta, zeta) = 0, zeta != 0} is charted by
9 real coordinates s = (x^1..x^3, Re zeta, Im zeta). Complex vector fields are
stored by their components on d/dx, d/dRe zeta, d/dIm zeta; (u, v, w) below are the
components on d/dx, d/dzeta, d/dzetabar.

The CR distribution is spanned by
    V1 = zeta^i X_i       (Levi-Civita horizontal lift)
    V2 = zetabar_i d/dzetabar_i
    V3 = sqrt(h) eps_ijk zetabar^j zeta^k d/dzetabar_i
and brackets are taken between these extended fields.
"""

from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import jax
import jax.numpy as jnp
import scipy.linalg

import spinor_algebra as sa
from base_geometry import ChartedGeometry, _christoffel, _coframe, _frame, sample_points, validated_point
from derivatives import check_mode
from errors import DegenerateDefiningFunction, InvalidConfig, NotNull
from forms import eigenspace, span_residual
from reports import DEFAULT_SEED, VerificationReport
from twistor_total_space import _r_spinor, structure_I

NULL_TOL = 1e-12
GRADIENT_TOL = 1e-10
SLICE_NEWTON_STEPS = 12

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k], LEVI_CIVITA[_i, _k, _j] = 1.0, -1.0


@dataclass(frozen=True)
class CRPoint:
    x: np.ndarray     # point of Sigma
    zeta: np.ndarray  # null covector, 3 complex components

    @property
    def coordinates(self) -> np.ndarray:
        return np.concatenate([self.x, self.zeta.real, self.zeta.imag])


@dataclass(frozen=True)
class CRDistribution:
    basis: np.ndarray  # (3, 9) complex: V1, V2, V3
    euler: np.ndarray  # (9,) complex: zeta_i d/dzeta_i


@dataclass(frozen=True)
class LeviFormValue:
    matrix: np.ndarray  # 2x2 hermitian in the frame (V1, V3)

    @property
    def signature(self) -> Tuple[int, int]:
        return _hermitian_signature(self.matrix)


def _hermitian_signature(matrix: np.ndarray) -> Tuple[int, int]:
    values = np.linalg.eigvalsh(matrix)
    cutoff = 1e-9 * max(1.0, np.max(np.abs(values)))
    return int(np.sum(values > cutoff)), int(np.sum(values < -cutoff))


# ---------------------------------------------------------------------------
# Traced kernels
# ---------------------------------------------------------------------------

def _to_real(u, v, w):
    return jnp.concatenate([u, 0.5 * (v + w), 0.5j * (w - v)])


def _split(s):
    return s[:3], s[3:6] + 1j * s[6:]


def _raised(geom: ChartedGeometry, s):
    x, zeta = _split(s)
    return x, zeta, jnp.linalg.solve(geom.metric(x), zeta)


def _field_V1(geom: ChartedGeometry, s):
    x, zeta, zeta_up = _raised(geom, s)
    gamma = _christoffel(geom, x)
    v = jnp.einsum("i,kij,k->j", zeta_up, gamma, zeta)
    w = jnp.einsum("i,kij,k->j", zeta_up, gamma, jnp.conj(zeta))
    return _to_real(zeta_up, v, w)


def _field_V2(geom: ChartedGeometry, s):
    _, zeta = _split(s)
    zero = jnp.zeros(3, dtype=complex)
    return _to_real(zero, zero, jnp.conj(zeta))


def _field_V3(geom: ChartedGeometry, s):
    x, zeta, zeta_up = _raised(geom, s)
    volume = jnp.sqrt(jnp.linalg.det(geom.metric(x)))
    w = volume * jnp.einsum("ijk,j,k->i", LEVI_CIVITA, jnp.conj(zeta_up), zeta_up)
    zero = jnp.zeros(3, dtype=complex)
    return _to_real(zero, zero, w)


def _field_euler(geom: ChartedGeometry, s):
    _, zeta = _split(s)
    zero = jnp.zeros(3, dtype=complex)
    return _to_real(zero, zeta, zero)


FIELDS = (_field_V1, _field_V2, _field_V3)


def _bracket(first: Callable, second: Callable, s):
    return jax.jacfwd(second)(s) @ first(s) - jax.jacfwd(first)(s) @ second(s)


def _conjugate(field: Callable) -> Callable:
    return lambda s: jnp.conj(field(s))


def _contact_form(geom: ChartedGeometry, s):
    """theta_i = sqrt(h) eps_ijk U^j V^k with zeta^# = U + iV (annihilates D + Dbar)."""
    x, _, zeta_up = _raised(geom, s)
    volume = jnp.sqrt(jnp.linalg.det(geom.metric(x)))
    return volume * jnp.einsum("ijk,j,k->i", LEVI_CIVITA, zeta_up.real, zeta_up.imag)


def _levi_matrix(geom: ChartedGeometry, s):
    theta = _contact_form(geom, s)
    frame = (partial(_field_V1, geom), partial(_field_V3, geom))
    rows = []
    for left in frame:
        rows.append(jnp.stack([theta @ (1j * _bracket(_conjugate(left), right, s))[:3] for right in frame]))
    return jnp.stack(rows)


def _conormals(geom: ChartedGeometry, s):
    """d(h^ij zeta_i zeta_j) and its conjugate as covectors on (dx, dzeta, dzetabar)."""
    x, zeta = _split(s)

    def quadratic(y):
        return jnp.linalg.solve(geom.metric(y), zeta) @ zeta

    zeta_up = jnp.linalg.solve(geom.metric(x), zeta)
    zero = jnp.zeros(3, dtype=complex)
    dx = jax.jacfwd(quadratic)(x)
    first = jnp.concatenate([dx, 2.0 * zeta_up, zero])
    second = jnp.concatenate([jnp.conj(dx), zero, 2.0 * jnp.conj(zeta_up)])
    return jnp.stack([first, second], axis=1)


def _slice_embedding(r: Callable, y):
    """x = (t(y), y) with r(x) = 0, by Newton steps in x^0 from t = 0."""
    t = 0.0 * y[0]
    for _ in range(SLICE_NEWTON_STEPS):
        point = jnp.concatenate([jnp.atleast_1d(t), y])
        t = t - r(point) / jax.grad(r)(point)[0]
    return jnp.concatenate([jnp.atleast_1d(t), y])


def _boundary_metric(geomX: ChartedGeometry, r: Callable, y):
    d_embed = jax.jacfwd(partial(_slice_embedding, r))(y)
    return d_embed.T @ geomX.metric(_slice_embedding(r, y)) @ d_embed


def _tangential(geomX: ChartedGeometry, r: Callable, x, pi):
    """Unnormalized xi = (c1, -c0) with c_A = r_AA' pi^A', and zeta^a = gamma(xi (x) pi)."""
    c = _r_spinor(geomX, r, x) @ pi
    xi = jnp.stack([c[1], -c[0]])
    return xi, jnp.einsum("aAP,A,P->a", sa.SOLDERING_INVERSE, xi, pi)


def _f_tilde(geomX: ChartedGeometry, r: Callable, q):
    """(y, pi) -> (y, zeta) with zeta the h-lowered tangential null vector."""
    y, pi = q[:3], q[3::2] + 1j * q[4::2]
    x = _slice_embedding(r, y)
    _, zeta_frame = _tangential(geomX, r, x, pi)
    tangent = _frame(geomX, x) @ zeta_frame
    zeta = _boundary_metric(geomX, r, y) @ tangent[1:]
    return jnp.concatenate([y, zeta.real, zeta.imag])


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _require_three(geom: ChartedGeometry):
    if geom.dimension != 3:
        raise InvalidConfig(f"Twistor CR structures live over 3-manifolds; '{geom.name}' is {geom.dimension}-dimensional.")


def cr_point(h3: ChartedGeometry, x, zeta) -> np.ndarray:
    """
    Validate (x, zeta) and return the 9 real coordinates.

    Raises:
        NotNull: If |h(zeta, zeta)| > 1e-12 (relative to |zeta|^2) or zeta = 0
    """
    _require_three(h3)
    x = validated_point(h3, x)
    zeta = np.asarray(zeta, dtype=complex).reshape(3)
    size = float(np.real(np.vdot(zeta, zeta)))
    value = complex(np.linalg.solve(h3.metric_at(x), zeta) @ zeta)
    if size == 0.0 or abs(value) > NULL_TOL * max(1.0, size):
        raise NotNull(
            f"Covector zeta = {zeta} is not a nonzero null covector at x = {x}: h(zeta, zeta) = {value:.3e}.\n"
            "Build zeta as (a + i b) theta with a, b orthonormal (see sample_cr_points)."
        )
    return np.concatenate([x, zeta.real, zeta.imag])


def sample_cr_points(h3: ChartedGeometry, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Seeded (x, zeta) with zeta = (a + i b) theta, a and b orthonormal in the h-frame."""
    base = sample_points(h3, count, seed)
    rng = np.random.default_rng(seed + 13)
    points = []
    for x in base:
        q, _ = np.linalg.qr(rng.normal(size=(3, 2)))
        theta = np.asarray(h3.kernel("coframe", partial(_coframe, h3))(x))
        zeta = (q[:, 0] + 1j * q[:, 1]) @ theta
        points.append(np.concatenate([x, zeta.real, zeta.imag]))
    return np.array(points)


def cr_distribution(h3: ChartedGeometry, x, zeta) -> CRDistribution:
    """
    Basis {zeta^i X_i, zetabar_i d/dzetabar_i, sqrt(h) eps zetabar zeta d/dzetabar} of D.

    Raises:
        NotNull: If zeta is not a nonzero null covector
    """
    s = cr_point(h3, x, zeta)
    kernel = h3.kernel("cr-fields", lambda q: (jnp.stack([field(h3, q) for field in FIELDS]), _field_euler(h3, q)))
    basis, euler = kernel(s)
    return CRDistribution(basis=np.asarray(basis), euler=np.asarray(euler))


def isotropy_residual(h3: ChartedGeometry, x, zeta) -> float:
    """Largest distance of V contracted into d zeta_i ^ dx^i from the conormal of M^."""
    s = cr_point(h3, x, zeta)
    distribution = cr_distribution(h3, x, zeta)
    normals = np.asarray(h3.kernel("conormals", partial(_conormals, h3))(s))
    worst = 0.0
    for vector in distribution.basis:
        u = vector[:3]
        a, b = vector[3:6], vector[6:]
        contracted = np.concatenate([a + 1j * b, -u, np.zeros(3)])
        if np.linalg.norm(contracted) > 0:
            worst = max(worst, span_residual(contracted, normals))
    return worst


def involutivity_residual(h3: ChartedGeometry, x, zeta) -> float:
    """Largest distance of the brackets [V_i, V_j] from D + C zeta-Euler."""
    s = cr_point(h3, x, zeta)

    def brackets(q):
        fields = [partial(field, h3) for field in FIELDS]
        pairs = [(0, 1), (0, 2), (1, 2)]
        return jnp.stack([_bracket(fields[i], fields[j], q) for i, j in pairs])

    values = np.asarray(h3.kernel("cr-brackets", brackets)(s))
    distribution = cr_distribution(h3, x, zeta)
    span = np.column_stack([*distribution.basis, distribution.euler])
    return max(span_residual(v, span) if np.linalg.norm(v) > 1e-14 else 0.0 for v in values)


def levi_form(h3: ChartedGeometry, x, zeta) -> LeviFormValue:
    """
    Levi form theta(i [conj V_j, V_k]) on the frame (V1, V3), hermitized.

    Raises:
        NotNull: If zeta is not a nonzero null covector
    """
    s = cr_point(h3, x, zeta)
    matrix = np.asarray(h3.kernel("levi", partial(_levi_matrix, h3))(s))
    return LeviFormValue(matrix=0.5 * (matrix + matrix.conj().T))


def boundary_geometry(geomX: ChartedGeometry, r: Callable) -> ChartedGeometry:
    """The slice r = 0 of a compactified chart with the induced metric h, charted by x^1..x^3."""
    key = ("boundary", id(r))
    if key not in geomX._kernels:
        geomX._kernels[key] = ChartedGeometry(
            name=f"{geomX.name}-boundary",
            metric=partial(_boundary_metric, geomX, r),
            lower=tuple(geomX.lower[1:]),
            upper=tuple(geomX.upper[1:]),
            description=f"r = 0 slice of {geomX.name}",
        )
    return geomX._kernels[key]


def tangential_spinor(geomX: ChartedGeometry, r: Callable, x, pi) -> np.ndarray:
    """
    The spinor xi with r_AA' xi^A pi^A' = 0, unit norm, first nonzero component real positive.

    Raises:
        ZeroSpinor: If pi vanishes
        DegenerateDefiningFunction: If |dr| < 1e-10 at x
    """
    x = validated_point(geomX, x)
    pi = sa.require_nonzero(pi)
    gradient = np.asarray(jax.grad(r)(jnp.asarray(x)))
    if np.linalg.norm(gradient) < GRADIENT_TOL:
        raise DegenerateDefiningFunction(
            f"Defining function has dr = {gradient} at x = {x}.\n"
            "The tangential spinor needs dr != 0; check that r vanishes to first order only."
        )
    xi, _ = geomX.kernel(("tangential", id(r)), partial(_tangential, geomX, r))(jnp.asarray(x), jnp.asarray(pi))
    xi = np.asarray(xi)
    xi = xi / np.linalg.norm(xi)
    lead = xi[0] if abs(xi[0]) > 1e-12 else xi[1]
    return xi * np.conj(lead) / abs(lead)


def tangential_residual(geomX: ChartedGeometry, r: Callable, x, pi) -> float:
    """max of |r_AA' xi^A pi^A'|, |dr(zeta)| and |g(zeta, zeta)| for zeta = gamma(xi (x) pi)."""
    xi = tangential_spinor(geomX, r, x, pi)
    pi = sa.as_spinor(pi)
    r_spinor = np.asarray(_r_spinor(geomX, r, jnp.asarray(x, dtype=float)))
    zeta = np.einsum("aAP,A,P->a", sa.SOLDERING_INVERSE, xi, pi)
    r_frame = np.asarray(jax.grad(r)(jnp.asarray(x, dtype=float))) @ np.asarray(_frame(geomX, jnp.asarray(x, dtype=float)))
    return max(abs(xi @ r_spinor @ pi), abs(r_frame @ zeta), abs(zeta @ zeta))


def embedding_residual(geomX: ChartedGeometry, r: Callable, y, pi) -> Tuple[float, float]:
    """
    Push the CR structure of P(S') over the slice through (y, pi) -> (y, zeta).

    Returns:
        (residual of the -i eigenvectors of I_r tangent to the slice against D + C zeta-Euler,
         residual of d/dpibar against D, including h(zeta, zeta) of the image point)
    """
    pi = sa.require_nonzero(pi)
    q = np.concatenate([np.asarray(y, dtype=float), np.stack([pi.real, pi.imag], axis=1).ravel()])
    h3 = boundary_geometry(geomX, r)
    push = geomX.kernel(("f-tilde", id(r)), lambda u: (_f_tilde(geomX, r, u), jax.jacfwd(partial(_f_tilde, geomX, r))(u)))
    image, jac = (np.asarray(v) for v in push(jnp.asarray(q)))

    x = np.asarray(_slice_embedding(r, jnp.asarray(q[:3])))
    p = np.concatenate([x, q[3:]])
    structure = structure_I(geomX, p)
    antiholomorphic = eigenspace(structure, -1j)
    dr = np.concatenate([np.asarray(jax.grad(r)(jnp.asarray(x))), np.zeros(4)])
    tangent = antiholomorphic @ scipy.linalg.null_space((dr @ antiholomorphic)[None, :])
    pushed = jac @ np.vstack([tangent[1:4], tangent[4:]])

    fields = np.asarray(h3.kernel("cr-fields-image", lambda s: jnp.stack(
        [field(h3, s) for field in FIELDS] + [_field_euler(h3, s)]))(image))
    zeta = image[3:6] + 1j * image[6:]
    null = abs(np.linalg.solve(h3.metric_at(image[:3]), zeta) @ zeta)

    fiber = np.zeros((7, 2), dtype=complex)
    fiber[3, 0], fiber[4, 0], fiber[5, 1], fiber[6, 1] = 0.5, 0.5j, 0.5, 0.5j
    return span_residual(pushed, fields.T), max(span_residual(jac @ fiber, fields[:3].T), null)


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

ANCHORS = {
    "isotropy": "D is isotropic for the symplectic form restricted to the null cone",
    "involutivity": "[D, D] lies in D + C zeta-Euler",
    "levi-signature": "Levi form has signature (1,1)",
    "tangential-spinor": "r_AA' xi^A pi^A' = 0 with gamma(xi (x) pi) null and tangent to the slice",
    "embedding": "(x, pi) -> (x, zeta) is a CR map into the twistor CR manifold",
}


def twistor_cr_check(h3: Optional[ChartedGeometry] = None, geomX: Optional[ChartedGeometry] = None,
                     r: Optional[Callable] = None, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                     mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Suite: isotropy, involutivity and Levi signature on h3; the tangential spinor and the
    embedding when a compactified geometry (geomX, r) is given. Without h3 the boundary
    geometry of (geomX, r) is used.
    """
    check_mode(mode)
    if h3 is None:
        if geomX is None or r is None:
            raise InvalidConfig("twistor_cr_check needs a 3-dimensional geometry or a compactified (geomX, r).")
        h3 = boundary_geometry(geomX, r)
    _require_three(h3)
    report = VerificationReport("twistor-cr", h3.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    points = (sample_cr_points(h3, int(samples), seed) if isinstance(samples, (int, np.integer))
              else np.atleast_2d(np.asarray(samples, dtype=float)))

    isotropy, involutive, levi, observed = [], [], [], set()
    for s in points:
        x, zeta = s[:3], s[3:6] + 1j * s[6:]
        isotropy.append(isotropy_residual(h3, x, zeta))
        involutive.append(involutivity_residual(h3, x, zeta))
        sig = levi_form(h3, x, zeta).signature
        observed.add(sig)
        levi.append(0.0 if sig == (1, 1) else 1.0)
    report.add("isotropy", ANCHORS["isotropy"], isotropy, max(tol, 1e-10))
    report.add("involutivity", ANCHORS["involutivity"], involutive, max(tol, 1e-6))
    report.add("levi-signature", ANCHORS["levi-signature"], levi, 0.5,
               note="observed " + ", ".join(f"({a},{b})" for a, b in sorted(observed)))

    if geomX is not None and r is not None:
        report.checks.extend(embedding_check(geomX, r, points[:, :3], tol, seed, mode, tolerances).checks)
    return report


def embedding_check(geomX: ChartedGeometry, r: Callable, samples=20, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                    mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Tangential spinor and CR-map checks over the slice r = 0 of a compactified chart.

    `samples` is a count or an array of slice coordinates y; fiber points are seeded Gaussians.
    """
    check_mode(mode)
    h3 = boundary_geometry(geomX, r)
    report = VerificationReport("twistor-cr", h3.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    slice_points = (sample_points(h3, int(samples), seed) if isinstance(samples, (int, np.integer))
                    else np.atleast_2d(np.asarray(samples, dtype=float)))
    rng = np.random.default_rng(seed + 17)
    tangential, embedding = [], []
    for y in slice_points:
        pi = rng.normal(size=2) + 1j * rng.normal(size=2)
        x = np.asarray(_slice_embedding(r, jnp.asarray(y)))
        tangential.append(tangential_residual(geomX, r, x, pi))
        embedding.append(max(embedding_residual(geomX, r, y, pi)))
    report.add("tangential-spinor", ANCHORS["tangential-spinor"], tangential, max(tol, 1e-12))
    report.add("embedding", ANCHORS["embedding"], embedding, max(tol, 1e-6))
    return report
