"""
Metrics on the projectivized bundle P(S').

A point q = (x^0..x^3, Re z, Im z) lives in one of two affine fiber charts:
chart 0 uses z = pi1'/pi0' and the section pi = (1, z), chart 1 uses
w = pi0'/pi1' and the section pi = (w, 1). Forms on P(S') are pullbacks of
C*-invariant forms on the total space along the section; the complex structure
on the quotient is dP o I o ds.
"""

from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, Optional

import numpy as np
import jax
import jax.numpy as jnp

from base_geometry import ChartedGeometry, conformal_rescale, einstein_lambda, sample_points, validated_point
from derivatives import check_mode, christoffel_symbols, riemann_tensor
from errors import BoundaryPoint, InvalidConfig, ZeroLambda
from forms import max_abs, pfaffian, signature
from reports import DEFAULT_SEED, VerificationReport
from spin_bundle import require_asd_einstein
from twistor_total_space import (
    _ddc,
    _norm,
    _omega_J,
    _pi,
    _potential_r,
    _real_coframe,
    _structure_I,
    interior_geometry,
    rescaled_defining,
    resolve_twistor_samples,
    twistor_point,
)

BOUNDARY_MARGIN = 0.05
EINSTEIN_CONSTANT = 4.0


@dataclass(frozen=True)
class ProjectivePoint:
    x: np.ndarray
    z: complex
    chart: int = 0

    @property
    def coordinates(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.x, dtype=float), [self.z.real, self.z.imag]])


# ---------------------------------------------------------------------------
# Traced kernels
# ---------------------------------------------------------------------------

def _section(chart: int, q):
    fiber = jnp.array([1.0, 0.0, q[4], q[5]]) if chart == 0 else jnp.array([q[4], q[5], 1.0, 0.0])
    return jnp.concatenate([q[:4], fiber])


def _projection(chart: int, p):
    pi = _pi(p)
    ratio = pi[1] / pi[0] if chart == 0 else pi[0] / pi[1]
    return jnp.concatenate([p[:4], jnp.stack([ratio.real, ratio.imag])])


def _pullback(chart: int, form, q):
    ds = jax.jacfwd(partial(_section, chart))(q)
    return ds.T @ form @ ds


def _quotient_structure(structure: Callable, chart: int, q):
    p = _section(chart, q)
    ds = jax.jacfwd(partial(_section, chart))(q)
    dP = jax.jacfwd(partial(_projection, chart))(p)
    return dP @ structure(p) @ ds


def _log_norm(p):
    return jnp.log(_norm(p))


def _ke_metric(geom: ChartedGeometry, chart: int, q):
    """dd^c log |pi|^2 along the section, turned into a metric with the quotient structure."""
    structure = partial(_structure_I, geom)
    form = _pullback(chart, _ddc(_log_norm, structure, _section(chart, q)), q)
    return form @ _quotient_structure(structure, chart, q)


def _ke_metric_closed(geom: ChartedGeometry, lam, chart: int, q):
    """Same metric from omega_KE = omega~_J / N - dN ^ d^cN / N^2 (first derivatives of the base only)."""
    p = _section(chart, q)
    structure = partial(_structure_I, geom)
    N = _norm(p)
    dN = jax.grad(_norm)(p)
    dcN = -0.5 * dN @ structure(p)
    form = _omega_J(geom, lam, p) / N - (jnp.outer(dN, dcN) - jnp.outer(dcN, dN)) / N ** 2
    return _pullback(chart, form, q) @ _quotient_structure(structure, chart, q)


def _cheng_yau_metric(geom: ChartedGeometry, r: Callable, chart: int, q):
    structure = partial(_structure_I, geom)
    log_potential = lambda p: jnp.log(jnp.abs(_potential_r(r, p)))  # noqa: E731
    form = -_pullback(chart, _ddc(log_potential, structure, _section(chart, q)), q)
    return form @ _quotient_structure(structure, chart, q)


def _horizontal_basis(geom: ChartedGeometry, chart: int, q):
    """Columns: dP of the horizontal lifts h_a at the section, then d/dRe z, d/dIm z."""
    p = _section(chart, q)
    lifts = jnp.linalg.inv(_real_coframe(geom, p))[:, :4]
    dP = jax.jacfwd(partial(_projection, chart))(p)
    return jnp.concatenate([dP @ lifts, jnp.eye(6)[:, 4:]], axis=1)


def _ma_sides(geom: ChartedGeometry, lam, p):
    """(omega~_J, beta, alpha) with beta = dd^c log |pi|^2 and alpha = i a ^ conj(a), a = dpi0 / pi0."""
    beta = _ddc(_log_norm, partial(_structure_I, geom), p)
    pi = _pi(p)
    a = jnp.zeros(8, dtype=complex).at[4].set(1.0).at[5].set(1j) / pi[0]
    alpha = jnp.real(1j * (jnp.outer(a, jnp.conj(a)) - jnp.outer(jnp.conj(a), a)))
    return _omega_J(geom, lam, p), beta, alpha


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def projective_point(geom: ChartedGeometry, q) -> tuple:
    if isinstance(q, ProjectivePoint):
        chart, q = q.chart, q.coordinates
    else:
        chart = 0
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != 6:
        raise InvalidConfig(f"A point of P(S') has 6 real coordinates (x, Re z, Im z), got {q.shape[0]}.")
    if chart not in (0, 1):
        raise InvalidConfig(f"Fiber chart must be 0 or 1, got {chart}.")
    validated_point(geom, q[:4])
    return q, chart


def sample_projective_points(geom: ChartedGeometry, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Seeded base points with fiber coordinates 0.2 <= |z| <= 2."""
    base = sample_points(geom, count, seed)
    rng = np.random.default_rng(seed + 11)
    modulus = rng.uniform(0.2, 2.0, size=count)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return np.column_stack([base, modulus * np.cos(phase), modulus * np.sin(phase)])


def fubini_study_block(z: complex) -> np.ndarray:
    """Fiber block of the metric with potential log(1 + |z|^2) in (Re z, Im z)."""
    return 2.0 / (1.0 + abs(z) ** 2) ** 2 * np.eye(2)


def _ke_kernel(geom: ChartedGeometry, chart: int) -> Callable:
    return geom.kernel(("ke-metric", chart), partial(_ke_metric, geom, chart))


def _cheng_yau_kernel(geomX: ChartedGeometry, r: Callable, chart: int) -> Callable:
    return geomX.kernel(("cheng-yau", id(r), chart), partial(_cheng_yau_metric, geomX, r, chart))


def ke_metric(geom: ChartedGeometry, q) -> np.ndarray:
    """
    Kahler-Einstein metric g_KE = (Lambda g) + g_FS on P(S') at q.

    Args:
        geom: Anti-self-dual Einstein geometry with Lambda != 0
        q: ProjectivePoint or 6 coordinates in chart 0

    Raises:
        NotASDEinstein: If the base is not anti-self-dual Einstein at x
        ZeroLambda: If Lambda = 0
    """
    q, chart = projective_point(geom, q)
    if abs(einstein_lambda(geom)) < 1e-12:
        raise ZeroLambda(f"Geometry '{geom.name}' has Lambda = 0; g_KE degenerates on horizontal vectors.")
    require_asd_einstein(geom, q[:4])
    return np.asarray(_ke_kernel(geom, chart)(q))


def ke_blocks(geom: ChartedGeometry, q):
    """(horizontal 4x4, mixed 4x2, fiber 2x2) blocks of g_KE in the basis h_a, d/dRe z, d/dIm z."""
    q, chart = projective_point(geom, q)
    basis = np.asarray(geom.kernel(("horizontal-basis", chart), partial(_horizontal_basis, geom, chart))(q))
    blocks = basis.T @ np.asarray(_ke_kernel(geom, chart)(q)) @ basis
    return blocks[:4, :4], blocks[:4, 4:], blocks[4:, 4:]


def chart_transition(q) -> np.ndarray:
    """(x, z) -> (x, 1/z): chart 0 to chart 1."""
    q = np.asarray(q, dtype=float)
    w = 1.0 / complex(q[4], q[5])
    return np.concatenate([q[:4], [w.real, w.imag]])


def chart_overlap_residual(geom: ChartedGeometry, q) -> float:
    """|g_KE(chart 0) - phi* g_KE(chart 1)| on the overlap z != 0."""
    q, _ = projective_point(geom, q)
    transition = lambda y: jnp.concatenate([y[:4], jnp.stack([y[4], -y[5]]) / (y[4] ** 2 + y[5] ** 2)])  # noqa: E731
    D = np.asarray(jax.jacfwd(transition)(jnp.asarray(q)))
    other = chart_transition(q)
    g0 = np.asarray(_ke_kernel(geom, 0)(q))
    g1 = np.asarray(_ke_kernel(geom, 1)(other))
    return max_abs(g0 - D.T @ g1 @ D)


def cheng_yau_metric(geomX: ChartedGeometry, r: Callable, q) -> np.ndarray:
    """
    Cheng-Yau metric from -dd^c log |r~| on the compactified chart.

    Raises:
        BoundaryPoint: If |r(x)| < 0.05
    """
    q, chart = projective_point(geomX, q)
    value = float(r(jnp.asarray(q[:4])))
    if abs(value) < BOUNDARY_MARGIN:
        raise BoundaryPoint(
            f"Point x = {q[:4]} is too close to the boundary (r = {value:.3e}).\n"
            f"The Cheng-Yau metric is evaluated only where |r| >= {BOUNDARY_MARGIN}."
        )
    return np.asarray(_cheng_yau_kernel(geomX, r, chart)(q))


def ma_descent_residual(geom: ChartedGeometry, p) -> float:
    """
    Relative residual of omega~_J^4 = 4 |pi|^8 (i dz0/z0 ^ conj) ^ omega_KE^3 at a total-space
    point with pi0 != 0, compared through Pfaffians.
    """
    p = twistor_point(geom, p)
    lam = einstein_lambda(geom)
    omega_J, beta, alpha = (np.asarray(v) for v in geom.kernel("ma-sides", partial(_ma_sides, geom, lam))(p))
    lhs = pfaffian(omega_J)
    rhs = float(p[4:] @ p[4:]) ** 4 * (pfaffian(beta + alpha) - pfaffian(beta))
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


def ke_einstein_residual(geom: ChartedGeometry, q, mode: str = "dual") -> float:
    """max |Ric(g_KE) - 4 g_KE| using the closed-form Kahler form."""
    q, chart = projective_point(geom, q)
    lam = einstein_lambda(geom)
    metric = partial(_ke_metric_closed, geom, lam, chart)

    def ricci(y):
        R = riemann_tensor(lambda u: christoffel_symbols(metric, u), y, mode)
        return jnp.einsum("cbca->ab", R), metric(y)

    ric, g = geom.kernel(("ke-ricci", chart, mode), ricci)(q)
    return max_abs(np.asarray(ric) - EINSTEIN_CONSTANT * np.asarray(g))


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

ANCHORS = {
    "off-block": "g_KE is block diagonal for horizontal + fiber",
    "horizontal-block": "horizontal block of g_KE = Lambda g",
    "fiber-block": "fiber block of g_KE = Fubini-Study of log(1 + |z|^2)",
    "chart-overlap": "g_KE agrees in the two fiber charts",
    "ma-descent": "omega~_J^4 = 4 |pi|^8 (i dz0/z0 ^ conj) ^ omega_KE^3",
    "einstein-constant": "Ric(g_KE) = 4 g_KE",
    "block-structure": "g_CY = (-Lambda g+) + (-g_FS)",
    "r-independence": "g_CY does not depend on the defining function",
    "potential-swap": "-dd^c log |r~| = -dd^c log |pi|^2 for g+",
}


def ke_metric_check(geom: ChartedGeometry, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                    mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """Suite: block structure of g_KE, chart overlap, Monge-Ampere descent and the Einstein constant."""
    check_mode(mode)
    report = VerificationReport("ke-metric", geom.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    lam = einstein_lambda(geom)
    if abs(lam) < 1e-12:
        return report.skip("Lambda = 0: g_KE is degenerate")
    if isinstance(samples, (int, np.integer)):
        points = sample_projective_points(geom, int(samples), seed)
        total = resolve_twistor_samples(geom, int(samples), seed)
    else:
        points = np.atleast_2d(np.asarray(samples, dtype=float))
        total = np.array([np.asarray(_section(0, jnp.asarray(q))) for q in points])

    off, horizontal, fiber, overlap, observed = [], [], [], [], set()
    for q in points:
        H, M, F = ke_blocks(geom, q)
        off.append(max_abs(M))
        horizontal.append(max_abs(H - lam * np.eye(4)))
        fiber.append(max_abs(F - fubini_study_block(complex(q[4], q[5]))))
        overlap.append(chart_overlap_residual(geom, q))
        observed.add(signature(np.asarray(_ke_kernel(geom, 0)(q))))
    report.add("off-block", ANCHORS["off-block"], off, max(tol, 1e-6))
    report.add("horizontal-block", ANCHORS["horizontal-block"], horizontal, max(tol, 1e-6),
               note="signature " + ", ".join(f"({a},{b})" for a, b in sorted(observed)))
    report.add("fiber-block", ANCHORS["fiber-block"], fiber, max(tol, 1e-8))
    report.add("chart-overlap", ANCHORS["chart-overlap"], overlap, max(tol, 1e-8))
    report.add("ma-descent", ANCHORS["ma-descent"], [ma_descent_residual(geom, p) for p in total], max(tol, 1e-4))
    report.add("einstein-constant", ANCHORS["einstein-constant"],
               [ke_einstein_residual(geom, q, mode) for q in points], max(tol, 1e-3))
    return report


def cheng_yau_check(geomX: ChartedGeometry, r: Callable, samples=8, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                    mode: str = "dual", tolerances: Optional[Dict[str, float]] = None) -> VerificationReport:
    """
    Suite: block structure of g_CY against the horizontal lifts of g+ = r^-2 gX,
    independence of r (r versus e^U r with U = 0.3 x^1) and the |pi|^2 potential.
    """
    check_mode(mode)
    report = VerificationReport("cheng-yau", geomX.name, seed=seed, deriv=mode, tolerances=dict(tolerances or {}))
    if geomX.interior_lambda is None:
        return report.skip("no interior Lambda recorded for this compactified geometry")
    interior = interior_geometry(geomX, r)
    upsilon = lambda x: 0.3 * x[1]  # noqa: E731
    geom_hat, r_hat = conformal_rescale(geomX, upsilon), rescaled_defining(r, upsilon)
    points = (sample_projective_points(geomX, int(samples), seed) if isinstance(samples, (int, np.integer))
              else np.atleast_2d(np.asarray(samples, dtype=float)))
    basis_kernel = interior.kernel(("horizontal-basis", 0), partial(_horizontal_basis, interior, 0))

    blocks, independence, swap, observed = [], [], [], set()
    for q in points:
        g = cheng_yau_metric(geomX, r, q)
        basis = np.asarray(basis_kernel(q))
        B = basis.T @ g @ basis
        blocks.append(max(
            max_abs(B[:4, :4] + geomX.interior_lambda * np.eye(4)),
            max_abs(B[:4, 4:]),
            max_abs(B[4:, 4:] + fubini_study_block(complex(q[4], q[5]))),
        ))
        independence.append(max_abs(g - np.asarray(_cheng_yau_kernel(geom_hat, r_hat, 0)(q))))
        swap.append(max_abs(g + np.asarray(_ke_kernel(interior, 0)(q))))
        observed.add(signature(g))
    report.add("block-structure", ANCHORS["block-structure"], blocks, max(tol, 1e-6),
               note="signature " + ", ".join(f"({a},{b})" for a, b in sorted(observed)))
    report.add("r-independence", ANCHORS["r-independence"], independence, max(tol, 1e-8))
    report.add("potential-swap", ANCHORS["potential-swap"], swap, max(tol, 1e-8))
    return report
