import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cnlslab.grid import make_grid
from cnlslab.groundstate import build_bundle
from cnlslab.params import make_params

UNIT_N = 4096  # unit-test resolution; acceptance uses the full default


@pytest.fixture(scope="session")
def p3n():
    """d=3, a=-3/16: the canonical attractive-potential parameter."""
    return make_params(3, -3.0 / 16.0)


@pytest.fixture(scope="session")
def p30():
    return make_params(3, 0.0)


@pytest.fixture(scope="session")
def p4n():
    return make_params(4, -0.1)


@pytest.fixture(scope="session")
def grid3n(p3n):
    return make_grid(p3n, 60.0, UNIT_N)


@pytest.fixture(scope="session")
def grid30(p30):
    return make_grid(p30, 60.0, UNIT_N)


@pytest.fixture(scope="session")
def grid4n(p4n):
    return make_grid(p4n, 60.0, UNIT_N)


@pytest.fixture(scope="session")
def bundle3n(p3n, grid3n):
    return build_bundle(p3n, grid3n)


@pytest.fixture(scope="session")
def bundle30(p30, grid30):
    return build_bundle(p30, grid30)


@pytest.fixture(scope="session")
def bundle4n(p4n, grid4n):
    return build_bundle(p4n, grid4n)
