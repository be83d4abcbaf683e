import time

import numpy as np
import pytest

from kinklab.errors import InvalidInputError
from kinklab.grid import Grid
from kinklab.kink import (compute_kink, decay_rate_fit, kink_epsilon_derivative, kink_profile,
                          rk4_kink)
from kinklab.model import make_phi4, make_phi_family


def test_phi4_closed_form(phi4_kink, grid):
    x = grid.x
    m = np.abs(x) <= 20
    assert np.max(np.abs(phi4_kink.H.values - np.tanh(x / np.sqrt(2)))[m]) <= 1e-12
    assert np.max(np.abs(phi4_kink.Hprime.values - 1 / (np.sqrt(2) * np.cosh(x / np.sqrt(2)) ** 2))) <= 1e-12


def test_phi4_distance_keeps_relative_precision(phi4_kink, grid):
    # s = 1 - tanh(y) = 2 / (1 + e^{2y}) keeps full relative accuracy in the tail
    x = grid.nodes("odd")
    s_exact = 2.0 / (1.0 + np.exp(np.sqrt(2) * x))
    assert np.max(np.abs(phi4_kink.distance / s_exact - 1)) <= 1e-12


@pytest.mark.parametrize("eps", [0.05, 0.3, 0.6])
def test_kink_solves_first_order_equation(eps):
    g = Grid(40.0, 8001)
    k = compute_kink(make_phi_family(eps), g)
    # W(H) cancels catastrophically near the vacuum, so compare where H' is sizable
    core = k.Hprime.values > 1e-2 * k.Hprime.values.max()
    W = k.model.W(k.H.values[core])
    assert np.max(np.abs(k.Hprime.values[core] / np.sqrt(2 * W) - 1)) <= 1e-10
    assert k.H.values[g.mid] == 0.0
    assert np.all(np.diff(k.H.values) >= 0)


def test_kink_second_order_equation_residual():
    # the three-point residual is pure stencil error: it drops 4x per halving
    out = []
    for n in (3001, 6001):
        g = Grid(30.0, n)
        H = compute_kink(make_phi_family(0.1), g).H.values
        d2 = (H[2:] - 2 * H[1:-1] + H[:-2]) / g.h**2
        out.append(np.max(np.abs(d2 - make_phi_family(0.1).dW(H[1:-1], 1))))
    assert out[1] <= 2e-5
    assert out[0] / out[1] == pytest.approx(4.0, rel=0.05)


def test_rk4_cross_check():
    g = Grid(30.0, 6001)
    m = make_phi_family(0.05)
    x, H = rk4_kink(m, g)
    k = compute_kink(m, g)
    ref = np.interp(x, g.x, k.H.values)
    assert np.max(np.abs(H - ref)) <= 1e-6


def test_decay_rate(phi4_kink):
    assert decay_rate_fit(phi4_kink) == pytest.approx(np.sqrt(2), rel=1e-6)


def test_domain_too_small_rejected():
    with pytest.raises(InvalidInputError):
        compute_kink(make_phi_family(0.9), Grid(30.0, 6001))


def test_log_derivative_exact(phi4_kink, grid):
    w = phi4_kink.log_derivative.values
    assert np.max(np.abs(w + np.sqrt(2) * np.tanh(grid.x / np.sqrt(2)))) <= 1e-12


def test_epsilon_derivative_at_zero_is_finite_and_odd():
    g = Grid(30.0, 3001)
    d = kink_epsilon_derivative(0.0, g).values
    assert np.all(np.isfinite(d))
    assert np.max(np.abs(d + d[::-1])) <= 1e-10


def test_runtime_phi4():
    kink_profile.cache_clear()
    t = time.perf_counter()
    compute_kink(make_phi4(), Grid(30.0, 6001))
    assert time.perf_counter() - t < 2.0
