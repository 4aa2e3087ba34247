import pytest

import spinrep as sr

from _helpers import cube, mixture, symmetric_rank1


@pytest.fixture(scope="session")
def grid32():
    return cube(32)


@pytest.fixture(scope="session")
def mixture32():
    """Full-rank N=2 mixture with complex coupling on a 32^3 box."""
    return mixture(32)


@pytest.fixture(scope="session")
def mixture48():
    return mixture(48)


@pytest.fixture(scope="session")
def rank1_32():
    """Symmetric rank-1 (pure-state) field, N=2, 32^3."""
    return symmetric_rank1(32)


@pytest.fixture(scope="session")
def diagonal32():
    return sr.gaussian_diagonal(cube(32), 2)
