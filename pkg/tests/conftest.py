import numpy as np
import pytest

from kinklab.grid import ODD, Grid
from kinklab.kink import compute_kink
from kinklab.model import make_phi4, make_phi_family
from kinklab.operator import eigen_decompose, linearized_operator
from kinklab.resonance import enumerate_sets


@pytest.fixture(scope="session")
def grid():
    return Grid(30.0, 6001)


@pytest.fixture(scope="session")
def phi4():
    return make_phi4()


@pytest.fixture(scope="session")
def phi4_kink(phi4, grid):
    return compute_kink(phi4, grid)


@pytest.fixture(scope="session")
def phi4_odd_spectrum(phi4_kink):
    return eigen_decompose(linearized_operator(phi4_kink, ODD))


@pytest.fixture(scope="session")
def phi4_structure(phi4, phi4_odd_spectrum):
    return enumerate_sets(phi4_odd_spectrum.lambdas, phi4.omega)


@pytest.fixture(scope="session")
def phi4_profile(phi4, phi4_kink, phi4_odd_spectrum, phi4_structure):
    from kinklab.profile import build_refined_profile
    return build_refined_profile(phi4, phi4_kink, phi4_odd_spectrum, phi4_structure)


@pytest.fixture(scope="session")
def phi8_kinks(grid):
    return {e: compute_kink(make_phi_family(e), grid) for e in (0.02, 0.05, 0.1)}


def closed_phi4_mode(x):
    """Unit-norm odd internal mode of the quartic linearization."""
    y = x / np.sqrt(2.0)
    return (9.0 / 8.0) ** 0.25 * np.tanh(y) / np.cosh(y)
