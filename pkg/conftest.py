"""Shared fixtures: catalog geometries are built once per module so compiled kernels are reused."""

import numpy as np
import pytest

from geometry_catalog import compactified_partner, create_geometry


@pytest.fixture(scope="module")
def flat():
    return create_geometry("flat")


@pytest.fixture(scope="module")
def hyperbolic():
    return create_geometry("hyperbolic")


@pytest.fixture(scope="module")
def sphere():
    return create_geometry("round-s4")


@pytest.fixture(scope="module")
def reversed_cp2():
    return create_geometry("fubini-study-reversed")


@pytest.fixture(scope="module")
def perturbed():
    return create_geometry("perturbed-noneinstein")


@pytest.fixture(scope="module")
def flat_r3():
    return create_geometry("flat-r3")


@pytest.fixture(scope="module")
def compactified():
    """(geomX, r) for the compactified hyperbolic slab."""
    return compactified_partner(create_geometry("hyperbolic-compactified"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
