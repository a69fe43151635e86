"""
Charted Riemannian geometries and their pointwise curvature.

A ChartedGeometry is one coordinate box plus a metric-component function
written in jax.numpy. Everything downstream (frames, spin connection, the
total-space fields) is traced through that function, so a new geometry only
needs a metric.

Frame conventions:
- The orthonormal coframe theta[a, mu] is the Gram-Schmidt orthonormalization
  of dx^0, ..., dx^3 in that order (lower triangular, positive diagonal).
  Orientation -1 swaps the last two legs.
- Curvature is stored in frame components with R[a, b, c, d] = R_ab^c_d,
  i.e. (nabla_a nabla_b - nabla_b nabla_a) v^c = R_ab^c_d v^d, Ricci
  R_ab = R_ca^c_b and Lambda = R / 24. The round sphere has positive Ricci.
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import jax
import jax.numpy as jnp

import spinor_algebra as sa
from derivatives import check_mode, christoffel_symbols, riemann_tensor
from errors import DegenerateMetric, InvalidConfig
from reports import DEFAULT_SEED, VerificationReport

PIVOT_TOL = 1e-12
SAMPLE_MARGIN = 0.1
BOUNDARY_EXCLUSION = 0.05
INFORMATIONAL_TOL = 1e12


@dataclass(frozen=True, eq=False)
class ChartedGeometry:
    """
    A single coordinate chart with a metric.

    Attributes:
        name: Catalog identifier
        metric: jax-traceable function x -> (n, n) symmetric metric components
        lower, upper: Coordinate box of the chart
        orientation: +1 keeps the Gram-Schmidt frame, -1 swaps its last two legs
        lambda_value: Known Lambda = R/24 for Einstein catalog members
        defining_function: r(x) for compactified charts (r = 0 is the boundary slice)
        interior_lambda: Lambda of the interior metric r^-2 g for compactified charts
    """

    name: str
    metric: Callable
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    orientation: int = 1
    lambda_value: Optional[float] = None
    defining_function: Optional[Callable] = None
    interior_lambda: Optional[float] = None
    description: str = ""
    _kernels: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or len(self.lower) not in (3, 4):
            raise InvalidConfig(
                f"Geometry '{self.name}' needs a 3- or 4-dimensional box, "
                f"got lower={self.lower}, upper={self.upper}."
            )
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise InvalidConfig(f"Geometry '{self.name}' has an empty coordinate box.")
        if self.orientation not in (1, -1):
            raise InvalidConfig(f"Orientation must be +1 or -1, got {self.orientation}.")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    def kernel(self, key, fun: Callable) -> Callable:
        """jit-compiled `fun`, cached on the geometry under `key`."""
        if key not in self._kernels:
            self._kernels[key] = jax.jit(fun)
        return self._kernels[key]

    def metric_at(self, x) -> np.ndarray:
        return np.asarray(self.metric(jnp.asarray(x, dtype=float)))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.lower)) and np.all(x <= np.asarray(self.upper)))


@dataclass(frozen=True)
class OrthonormalCoframe:
    coframe: np.ndarray  # theta[a, mu]
    frame: np.ndarray    # e[mu, a]
    orientation: int


@dataclass(frozen=True)
class CurvatureData:
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    schouten: np.ndarray
    weyl: np.ndarray
    weyl_plus: Optional[np.ndarray]
    weyl_minus: Optional[np.ndarray]


@dataclass(frozen=True)
class CurvatureSpinors:
    psi: np.ndarray         # Psi[A, B, C, D]
    psi_tilde: np.ndarray   # Psi~[A', B', C', D']
    phi: np.ndarray         # Phi[A, B, A', B']
    lam: float
    reassembly_residual: float


# ---------------------------------------------------------------------------
# Traced kernels
# ---------------------------------------------------------------------------

def _coframe(geom: ChartedGeometry, x):
    root = jnp.linalg.cholesky(jnp.linalg.inv(geom.metric(x)))
    theta = jnp.linalg.inv(root)
    if geom.orientation < 0:
        n = geom.dimension
        theta = theta[jnp.array(list(range(n - 2)) + [n - 1, n - 2])]
    return theta


def _frame(geom: ChartedGeometry, x):
    return jnp.linalg.inv(_coframe(geom, x))


def _christoffel(geom: ChartedGeometry, x):
    return christoffel_symbols(geom.metric, x)


def _frame_connection(geom: ChartedGeometry, x):
    """omega[c, a, b] with nabla_{e_c} e_b = omega[c, a, b] e_a."""
    theta = _coframe(geom, x)
    frame = jnp.linalg.inv(theta)
    d_frame = jax.jacfwd(partial(_frame, geom))(x)  # [mu, b, nu] = d_nu e_b^mu
    gamma = _christoffel(geom, x)
    covariant = d_frame + jnp.einsum("mnl,lb->mbn", gamma, frame)
    return jnp.einsum("am,mbn,nc->cab", theta, covariant, frame)


def _riemann_frame(geom: ChartedGeometry, x, mode: str = "dual"):
    coordinate = riemann_tensor(partial(_christoffel, geom), x, mode)
    theta = _coframe(geom, x)
    frame = jnp.linalg.inv(theta)
    return jnp.einsum("cr,rsmn,sd,ma,nb->abcd", theta, coordinate, frame, frame, frame)


def _frame_derivative(geom: ChartedGeometry, fun: Callable, x):
    """Frame derivatives e_a(f) of a scalar function: d f(x) contracted with e_a."""
    return jax.grad(fun)(x) @ _frame(geom, x)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def validated_point(geom: ChartedGeometry, x) -> np.ndarray:
    """
    Check that the metric is usable at x and return x as a float array.

    Raises:
        DegenerateMetric: If the metric is singular, indefinite or non-finite at x
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != geom.dimension:
        raise InvalidConfig(f"Point {x} has the wrong dimension for '{geom.name}' ({geom.dimension}).")
    g = geom.metric_at(x)
    if not np.all(np.isfinite(g)):
        raise DegenerateMetric(f"Metric of '{geom.name}' is not finite at x = {x}.")
    try:
        root = np.linalg.cholesky(np.linalg.inv(0.5 * (g + g.T)))
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetric(
            f"Metric of '{geom.name}' is singular or not positive definite at x = {x}.\n"
            f"Eigenvalues: {np.linalg.eigvalsh(0.5 * (g + g.T))}"
        ) from exc
    pivots = np.abs(np.diag(root))
    if np.min(pivots) < PIVOT_TOL or np.min(np.linalg.eigvalsh(g)) < PIVOT_TOL:
        raise DegenerateMetric(
            f"Metric of '{geom.name}' is degenerate at x = {x} (smallest pivot {np.min(pivots):.3e})."
        )
    return x


def orthonormal_coframe(geom: ChartedGeometry, x) -> OrthonormalCoframe:
    """
    Gram-Schmidt orthonormal coframe at x.

    Raises:
        DegenerateMetric: If a pivot falls below 1e-12
    """
    x = validated_point(geom, x)
    theta = np.asarray(geom.kernel("coframe", partial(_coframe, geom))(x))
    return OrthonormalCoframe(coframe=theta, frame=np.linalg.inv(theta), orientation=geom.orientation)


def frame_connection(geom: ChartedGeometry, x) -> np.ndarray:
    x = validated_point(geom, x)
    return np.asarray(geom.kernel("frame-connection", partial(_frame_connection, geom))(x))


def curvature_from_riemann(riemann: np.ndarray) -> CurvatureData:
    n = riemann.shape[0]
    eye = np.eye(n)
    ricci = np.einsum("cacb->ab", riemann)
    scalar = float(np.trace(ricci))
    if n == 3:
        schouten = ricci - scalar / 4.0 * eye
        return CurvatureData(riemann, ricci, scalar, schouten, np.zeros_like(riemann), None, None)

    schouten = 0.5 * ricci - scalar / 12.0 * eye
    weyl = (
        riemann
        - (np.einsum("ca,bd->abcd", schouten, eye) - np.einsum("cb,ad->abcd", schouten, eye))
        + (np.einsum("da,bc->abcd", schouten, eye) - np.einsum("db,ac->abcd", schouten, eye))
    )
    dual = hodge_dual(weyl)
    return CurvatureData(
        riemann=riemann,
        ricci=ricci,
        scalar=scalar,
        schouten=schouten,
        weyl=weyl,
        weyl_plus=0.5 * (weyl + dual),
        weyl_minus=0.5 * (weyl - dual),
    )


def hodge_dual(tensor: np.ndarray) -> np.ndarray:
    """1/2 e_cd^pq T_abpq on the second index pair."""
    return 0.5 * np.einsum("cdpq,abpq->abcd", sa.VOLUME, tensor)


def curvature(geom: ChartedGeometry, x, mode: str = "dual") -> CurvatureData:
    """
    Frame curvature at x: Riemann, Ricci, scalar, Schouten, Weyl and its SD/ASD parts.

    Raises:
        DegenerateMetric: If the metric is unusable at x
    """
    check_mode(mode)
    x = validated_point(geom, x)
    riemann = np.asarray(geom.kernel(("riemann", mode), partial(_riemann_frame, geom, mode=mode))(x))
    return curvature_from_riemann(riemann)


def spinors_from_curvature(data: CurvatureData) -> CurvatureSpinors:
    eps = sa.EPSILON
    weyl = sa.frame_to_spinor_4(data.weyl.astype(complex))
    psi = 0.25 * np.einsum("APBQCRDS,PQ,RS->ABCD", weyl, eps, eps)
    psi_tilde = 0.25 * np.einsum("APBQCRDS,AB,CD->PQRS", weyl, eps, eps)
    trace_free = data.ricci - data.scalar / 4.0 * np.eye(4)
    phi = -0.5 * np.einsum("APBQ->ABPQ", sa.frame_to_spinor_2(trace_free.astype(complex)))
    lam = data.scalar / 24.0
    rebuilt = sa.reassemble_riemann(psi, psi_tilde, phi, lam)
    return CurvatureSpinors(
        psi=psi,
        psi_tilde=psi_tilde,
        phi=phi,
        lam=lam,
        reassembly_residual=float(np.max(np.abs(rebuilt - data.riemann))),
    )


def curvature_spinors(geom: ChartedGeometry, x, mode: str = "dual") -> CurvatureSpinors:
    """
    Curvature spinors (Psi, Psi~, Phi, Lambda) at x.

    Raises:
        DegenerateMetric: If the metric is unusable at x
        InvalidConfig: If the geometry is not 4-dimensional
    """
    if geom.dimension != 4:
        raise InvalidConfig(f"Curvature spinors need a 4-dimensional geometry; '{geom.name}' is {geom.dimension}-dimensional.")
    return spinors_from_curvature(curvature(geom, x, mode))


def einstein_lambda(geom: ChartedGeometry) -> float:
    """Lambda of an Einstein geometry: the catalog value, else R/24 at the chart center."""
    if geom.lambda_value is not None:
        return float(geom.lambda_value)
    if "lambda" not in geom._kernels:
        anchor_point = geom.center
        if geom.defining_function is not None:
            anchor_point = sample_points(geom, 1, DEFAULT_SEED)[0]
        geom._kernels["lambda"] = curvature(geom, anchor_point).scalar / 24.0
    return geom._kernels["lambda"]


def sample_points(geom: ChartedGeometry, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """
    Seeded uniform points in the chart box shrunk by a 10% margin.

    Charts with a defining function also skip |r| < 0.05.
    """
    if count < 1:
        raise InvalidConfig(f"Sample count must be at least 1, got {count}.")
    rng = np.random.default_rng(seed)
    lower, upper = np.asarray(geom.lower, dtype=float), np.asarray(geom.upper, dtype=float)
    width = upper - lower
    lo, hi = lower + SAMPLE_MARGIN * width, upper - SAMPLE_MARGIN * width
    points = []
    while len(points) < count:
        x = rng.uniform(lo, hi)
        if geom.defining_function is not None and abs(float(geom.defining_function(jnp.asarray(x)))) < BOUNDARY_EXCLUSION:
            continue
        points.append(x)
    return np.array(points)


def resolve_samples(geom: ChartedGeometry, samples, seed: int = DEFAULT_SEED) -> np.ndarray:
    if isinstance(samples, (int, np.integer)):
        return sample_points(geom, int(samples), seed)
    return np.atleast_2d(np.asarray(samples, dtype=float))


ASD_ANCHORS = {
    "psi-tilde": "anti-self-dual: Psi~ = 0",
    "phi": "Einstein: trace-free Ricci Phi = 0",
    "lambda-constancy": "Einstein: Lambda = R/24 constant",
    "reassembly": "Riemann = Psi + Psi~ + Phi + Lambda decomposition",
    "duality": "W+ and W- are the +1/-1 eigenspaces of the Hodge star",
}


def asd_einstein_check(geom: ChartedGeometry, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                       mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Verify that geom is anti-self-dual Einstein at seeded sample points.

    Args:
        geom: 4-dimensional geometry
        samples: Number of points, or an explicit array of points
        tol: Tolerance for the Psi~, Phi and Lambda-constancy checks
        seed: Seed for drawing sample points
        mode: Derivative mode
        tolerances: Per-check overrides

    Returns:
        VerificationReport; failures are recorded, never raised
    """
    report = VerificationReport("asd-einstein", geom.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    points = resolve_samples(geom, samples, seed)
    psi_tilde, phi, lambdas, reassembly, duality = [], [], [], [], []
    for x in points:
        data = curvature(geom, x, mode)
        spinors = spinors_from_curvature(data)
        psi_tilde.append(np.max(np.abs(spinors.psi_tilde)))
        phi.append(np.max(np.abs(spinors.phi)))
        lambdas.append(spinors.lam)
        reassembly.append(spinors.reassembly_residual)
        duality.append(max(
            np.max(np.abs(hodge_dual(data.weyl_plus) - data.weyl_plus)),
            np.max(np.abs(hodge_dual(data.weyl_minus) + data.weyl_minus)),
        ))
    lambdas = np.array(lambdas)
    report.add("psi-tilde", ASD_ANCHORS["psi-tilde"], psi_tilde, tol)
    report.add("phi", ASD_ANCHORS["phi"], phi, tol)
    report.add("lambda-constancy", ASD_ANCHORS["lambda-constancy"], np.abs(lambdas - lambdas[0]), max(tol, 1e-7),
               note=f"Lambda = {lambdas[0]:.10g}")
    report.add("reassembly", ASD_ANCHORS["reassembly"], reassembly, max(tol, 1e-8))
    report.add("duality", ASD_ANCHORS["duality"], duality, max(tol, 1e-8))
    return report


def conformal_rescale(geom: ChartedGeometry, upsilon: Callable, name: Optional[str] = None) -> ChartedGeometry:
    """
    The geometry e^(2 upsilon) g on the same chart, same orientation.

    Args:
        upsilon: jax-traceable function x -> scalar
    """
    metric = geom.metric

    def rescaled(x):
        return jnp.exp(2.0 * upsilon(x)) * metric(x)

    return ChartedGeometry(
        name=name or f"{geom.name}-rescaled",
        metric=rescaled,
        lower=geom.lower,
        upper=geom.upper,
        orientation=geom.orientation,
        defining_function=geom.defining_function,
        description=f"conformal rescale of {geom.name}",
    )


def weyl_conformal_residual(geom: ChartedGeometry, upsilon: Callable, x, mode: str = "dual") -> float:
    """
    |W^(e^2U g) - e^(-2U) W^g| in matched Gram-Schmidt frames (theta^ = e^U theta).
    """
    x = validated_point(geom, x)
    rescaled = conformal_rescale(geom, upsilon)
    weight = np.exp(-2.0 * float(upsilon(jnp.asarray(x))))
    return float(np.max(np.abs(curvature(rescaled, x, mode).weyl - weight * curvature(geom, x, mode).weyl)))


def _defining_derivatives(geom: ChartedGeometry, r: Callable, x):
    """(r, frame gradient r_a, frame Hessian nabla_a r_b) of the defining function."""
    frame = _frame(geom, x)
    gradient = jax.grad(r)(x)
    hessian = jax.hessian(r)(x) - jnp.einsum("kij,k->ij", _christoffel(geom, x), gradient)
    return r(x), gradient @ frame, frame.T @ hessian @ frame


SPECIAL_ANCHORS = {
    "gradient-norm": "special defining function: |dr|^2 = -2 Lambda",
    "totally-geodesic": "nabla_a r_b + r P_ab = 0 (boundary totally geodesic)",
    "schouten-norm": "size of the compactified Schouten tensor (informational)",
}


def special_defining_check(geomX: ChartedGeometry, r: Callable, samples=8, tol: float = 1e-8,
                           seed: int = DEFAULT_SEED, mode: str = "dual", lambda_value: Optional[float] = None,
                           tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Check that r is a special defining function for the compactified metric geomX.

    Args:
        geomX: Compactified metric r^2 g+ (kept fixed; r is not used to rebuild it)
        r: jax-traceable defining function
        lambda_value: Lambda of the interior metric; defaults to geomX.interior_lambda,
            else the Lambda of r^-2 geomX at the first sample point

    Returns:
        VerificationReport with the gradient-norm, totally-geodesic and schouten-norm checks
    """
    report = VerificationReport("special-defining", geomX.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    points = resolve_samples(geomX, samples, seed)
    if lambda_value is None:
        lambda_value = geomX.interior_lambda
    if lambda_value is None:
        interior = conformal_rescale(geomX, lambda y: -jnp.log(jnp.abs(r(y))))
        lambda_value = curvature(interior, points[0], mode).scalar / 24.0

    kernel = geomX.kernel(("defining", id(r)), partial(_defining_derivatives, geomX, r))
    gradient_norm, geodesic, schouten = [], [], []
    for x in points:
        value, gradient, hessian = (np.asarray(v) for v in kernel(jnp.asarray(x)))
        p_bar = curvature(geomX, x, mode).schouten
        gradient_norm.append(abs(float(gradient @ gradient) + 2.0 * lambda_value))
        geodesic.append(np.max(np.abs(hessian + float(value) * p_bar)))
        schouten.append(np.max(np.abs(p_bar)))
    report.add("gradient-norm", SPECIAL_ANCHORS["gradient-norm"], gradient_norm, max(tol, 1e-8))
    report.add("totally-geodesic", SPECIAL_ANCHORS["totally-geodesic"], geodesic, max(tol, 1e-8))
    report.add("schouten-norm", SPECIAL_ANCHORS["schouten-norm"], schouten, INFORMATIONAL_TOL,
               note=f"max |P| = {max(schouten):.3e}")
    return report
