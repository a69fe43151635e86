#!/usr/bin/env python3
"""
Geometry Catalog Module

Provides the example geometries used by the verification suites and a factory
that picks one by name:
- flat                     Euclidean R^4 (Lambda = 0, coframe sanity only)
- hyperbolic               upper half-space model of H^4, Lambda = -1/2
- round-s4                 unit round S^4 in a stereographic chart, Lambda = 1/2
- fubini-study-reversed    CP^2 chart with the anti-self-dual orientation, Lambda = 1
- fubini-study             same chart, wrong orientation (negative control)
- perturbed-noneinstein    hyperbolic metric plus 0.1 (dx^1)^2 (negative control)
- hyperbolic-compactified  flat slab r^2 g+ with r = x^0 on both sides of r = 0
- flat-r3                  Euclidean R^3 (boundary geometry for twistor CR)

Configure via environment variables:
- TWISTOR_GEOMETRY: default geometry name (default "hyperbolic")
"""

import os
from typing import Callable, Dict, Optional, Tuple

import jax.numpy as jnp
from dotenv import load_dotenv

from base_geometry import ChartedGeometry
from errors import UnknownGeometry

# Load environment variables
load_dotenv()

DEFAULT_GEOMETRY = "hyperbolic"


def flat_r4() -> ChartedGeometry:
    return ChartedGeometry(
        name="flat",
        metric=lambda x: jnp.eye(4) + 0.0 * x[0],
        lower=(-1.0, -1.0, -1.0, -1.0),
        upper=(1.0, 1.0, 1.0, 1.0),
        lambda_value=0.0,
        description="Euclidean R^4",
    )


def hyperbolic_half_space() -> ChartedGeometry:
    """g+ = |dx|^2 / (x^0)^2 on x^0 in [0.5, 2]."""
    return ChartedGeometry(
        name="hyperbolic",
        metric=lambda x: jnp.eye(4) / x[0] ** 2,
        lower=(0.5, -1.0, -1.0, -1.0),
        upper=(2.0, 1.0, 1.0, 1.0),
        lambda_value=-0.5,
        description="upper half-space model of H^4",
    )


def round_s4(radius: float = 1.0) -> ChartedGeometry:
    """Stereographic chart g = 4 a^4 |dx|^2 / (a^2 + |x|^2)^2, Lambda = 1 / (2 a^2)."""
    a2 = radius ** 2
    return ChartedGeometry(
        name="round-s4" if radius == 1.0 else f"round-s4-{radius:g}",
        metric=lambda x: 4.0 * a2 ** 2 / (a2 + x @ x) ** 2 * jnp.eye(4),
        lower=(-1.0, -1.0, -1.0, -1.0),
        upper=(1.0, 1.0, 1.0, 1.0),
        lambda_value=1.0 / (2.0 * a2),
        description=f"round S^4 of radius {radius:g}",
    )


def _fubini_study_metric(x):
    z = jnp.stack([x[0] + 1j * x[1], x[2] + 1j * x[3]])
    w = 1.0 + jnp.real(jnp.vdot(z, z))
    hermitian = jnp.eye(2) / w - jnp.outer(jnp.conj(z), z) / w ** 2
    # dz^j(d_mu) for the real coordinates (x0, x1, x2, x3)
    dz = jnp.array([[1.0, 0.0], [1.0j, 0.0], [0.0, 1.0], [0.0, 1.0j]])
    return jnp.real(dz @ hermitian @ jnp.conj(dz).T)


def fubini_study_reversed() -> ChartedGeometry:
    """Fubini-Study on the affine chart z1 = x0 + i x1, z2 = x2 + i x3; Ric = 6 g, Lambda = 1."""
    return ChartedGeometry(
        name="fubini-study-reversed",
        metric=_fubini_study_metric,
        lower=(-1.0, -1.0, -1.0, -1.0),
        upper=(1.0, 1.0, 1.0, 1.0),
        orientation=1,
        lambda_value=1.0,
        description="CP^2 with the anti-self-dual orientation",
    )


def fubini_study() -> ChartedGeometry:
    return ChartedGeometry(
        name="fubini-study",
        metric=_fubini_study_metric,
        lower=(-1.0, -1.0, -1.0, -1.0),
        upper=(1.0, 1.0, 1.0, 1.0),
        orientation=-1,
        lambda_value=1.0,
        description="CP^2 with the complex (self-dual) orientation",
    )


def perturbed_noneinstein() -> ChartedGeometry:
    bump = jnp.zeros((4, 4)).at[1, 1].set(0.1)
    return ChartedGeometry(
        name="perturbed-noneinstein",
        metric=lambda x: jnp.eye(4) / x[0] ** 2 + bump,
        lower=(0.5, -1.0, -1.0, -1.0),
        upper=(2.0, 1.0, 1.0, 1.0),
        description="hyperbolic metric plus 0.1 (dx^1)^2",
    )


def hyperbolic_compactified() -> ChartedGeometry:
    """The flat slab r^2 g+ = |dx|^2 with r = x^0, reaching across r = 0."""
    return ChartedGeometry(
        name="hyperbolic-compactified",
        metric=lambda x: jnp.eye(4) + 0.0 * x[0],
        lower=(-1.0, -1.0, -1.0, -1.0),
        upper=(1.0, 1.0, 1.0, 1.0),
        defining_function=lambda x: x[0],
        interior_lambda=-0.5,
        description="compactified H^4: flat metric, r = x^0",
    )


def flat_r3() -> ChartedGeometry:
    return ChartedGeometry(
        name="flat-r3",
        metric=lambda x: jnp.eye(3) + 0.0 * x[0],
        lower=(-1.0, -1.0, -1.0),
        upper=(1.0, 1.0, 1.0),
        lambda_value=0.0,
        description="Euclidean R^3",
    )


CATALOG: Dict[str, Callable[[], ChartedGeometry]] = {
    "flat": flat_r4,
    "hyperbolic": hyperbolic_half_space,
    "round-s4": round_s4,
    "fubini-study-reversed": fubini_study_reversed,
    "fubini-study": fubini_study,
    "perturbed-noneinstein": perturbed_noneinstein,
    "hyperbolic-compactified": hyperbolic_compactified,
    "flat-r3": flat_r3,
}

# Geometries whose compactified model is known in closed form.
COMPACTIFIED_PARTNERS = {
    "hyperbolic": "hyperbolic-compactified",
    "hyperbolic-compactified": "hyperbolic-compactified",
}


def create_geometry(name: Optional[str] = None) -> ChartedGeometry:
    """
    Factory function to build a catalog geometry by name.

    Args:
        name: Catalog name; defaults to TWISTOR_GEOMETRY, then "hyperbolic"

    Returns:
        ChartedGeometry instance

    Raises:
        UnknownGeometry: If the name is not in the catalog
    """
    if name is None:
        name = os.environ.get("TWISTOR_GEOMETRY", DEFAULT_GEOMETRY)
    name = name.strip().lower()

    if name not in CATALOG:
        raise UnknownGeometry(
            f"Invalid geometry: '{name}'. Must be one of: {', '.join(CATALOG)}.\n"
            f"Set TWISTOR_GEOMETRY in your .env file or pass --geometry."
        )

    geom = CATALOG[name]()
    print(f"[Geometry Catalog] Using {geom.name} ({geom.description})")
    return geom


def compactified_partner(geom: ChartedGeometry) -> Optional[Tuple[ChartedGeometry, Callable]]:
    """
    The compactified model (geomX, r) of a catalog geometry, or None if there is none.
    """
    partner = COMPACTIFIED_PARTNERS.get(geom.name)
    if partner is None:
        return None
    geomX = geom if geom.name == partner else CATALOG[partner]()
    return geomX, geomX.defining_function
