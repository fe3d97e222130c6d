import numpy as np
import pytest

from adrlab.adr1d import SchemeId, scheme_operators
from adrlab.operators import Grid1D


@pytest.fixture(scope="session")
def grid1001():
    return Grid1D(1001, 1.0)


@pytest.fixture(scope="session")
def ops1001(grid1001):
    """Operator pairs for all four schemes on the 1001-point analysis grid.

    Built once per session; the combined-compact assembly alone is a handful
    of dense 1001^3 solves.
    """
    return {scheme: scheme_operators(scheme, grid1001) for scheme in SchemeId}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
