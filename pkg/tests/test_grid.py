import numpy as np
import pytest

from kinklab.errors import InvalidInputError
from kinklab.grid import FULL, ODD, Grid, GridFunction, check_sector


def test_grid_geometry():
    g = Grid(10.0, 101)
    assert g.h == pytest.approx(0.2)
    assert g.x[g.mid] == 0.0
    assert g.size(ODD) == 51 and g.size(FULL) == 101
    assert g.refined().n == 201


@pytest.mark.parametrize("n", [100, 3, 4])
def test_grid_rejects_even_or_small(n):
    with pytest.raises(InvalidInputError):
        Grid(10.0, n)


def test_sector_check():
    with pytest.raises(InvalidInputError):
        check_sector("even")


def test_odd_integral_doubles_half_line():
    g = Grid(20.0, 4001)
    f = GridFunction(g, np.tanh(g.x) ** 2 / np.cosh(g.x), FULL)
    half = f.restrict_half()
    assert half.integral() == pytest.approx(f.integral(), rel=1e-12)
    assert half.to_full_line(+1).values == pytest.approx(f.values)


def test_dot_conjugates_first_argument():
    g = Grid(5.0, 11)
    a = GridFunction(g, 1j * np.ones(g.n))
    b = GridFunction(g, np.ones(g.n))
    assert a.dot(b) == pytest.approx(-1j * 10.0)
    assert a.norm2() == pytest.approx(10.0)


def test_arithmetic_and_odd_extension():
    g = Grid(5.0, 11)
    u = GridFunction(g, g.nodes(ODD) ** 2, ODD)
    v = (u * 2.0 + u).to_full_line(-1)
    assert np.allclose(v.values, 3 * np.sign(g.x) * g.x**2)
