import numpy as np
import pytest
import sympy as sp

from kinklab.errors import CascadeInconsistencyError, InvalidInputError
from kinklab.grid import Grid
from kinklab.model import make_phi_family
from kinklab.phi8 import (a0_psi_check, eigenvalue_shift, figure1_data, forward_difference_shift,
                          kmmvdb_check, lambda0_quadrature, omega2_eps, phi8_report,
                          tildeV3_closed_form, tildeV3_numeric, v3_potential, worker_count)


def test_lambda0_symbolic():
    t = sp.symbols("t")
    num = sp.integrate((-3 + 24 * t**2 - 21 * t**4) * t**2, (t, -1, 1))
    den = sp.integrate(t**2, (t, -1, 1))
    assert num / den == sp.Rational(12, 5)
    assert lambda0_quadrature() == pytest.approx(2.4, abs=1e-6)


def test_omega_eps_symbolic():
    u, e = sp.symbols("u e")
    W = (1 + e) ** 2 * (u**2 - 1) ** 2 * (e * u**2 - 1) ** 2 / 4
    w2 = sp.expand(sp.diff(W, u, 2).subs(u, 1))
    assert sp.simplify(w2 - 2 * (1 - e**2) ** 2) == 0
    for eps in (0.0, 0.1, 0.7):
        assert omega2_eps(eps) == pytest.approx(float(w2.subs(e, eps)), abs=1e-13)


def test_eigenvalue_shift_regression():
    assert eigenvalue_shift([0.005, 0.01, 0.02]) == pytest.approx(2.4, abs=0.05)
    assert forward_difference_shift(0.01) == pytest.approx(2.4, abs=0.1)
    with pytest.raises(InvalidInputError):
        eigenvalue_shift([0.01])
    with pytest.raises(InvalidInputError):
        eigenvalue_shift([0.01, 0.5])


def test_tildeV3_closed_form_properties(grid):
    v = tildeV3_closed_form(grid).values
    assert v[grid.mid] == pytest.approx(1.8, abs=1e-15)
    assert abs(v[0]) < 1e-15
    dv = np.gradient(v, grid.h)
    x = grid.x
    m = (np.abs(x) > 0) & (np.abs(x) < 25)
    assert np.all(x[m] * dv[m] < 0)


def test_tildeV3_numeric_first_order(grid):
    cf = tildeV3_closed_form(grid).values
    d02 = np.max(np.abs(tildeV3_numeric(0.02, grid).values - cf))
    d01 = np.max(np.abs(tildeV3_numeric(0.01, grid).values - cf))
    assert d02 <= 0.05 and d01 <= 0.03
    assert d02 / d01 >= 1.8
    assert tildeV3_numeric(0.02, grid).values[grid.mid] == pytest.approx(1.8, abs=0.05)
    with pytest.raises(InvalidInputError):
        tildeV3_numeric(0.2, grid)


def test_v3_requires_two_stages(grid):
    with pytest.raises(CascadeInconsistencyError):
        v3_potential(0.5, grid)


def test_a0psi(grid):
    res = a0_psi_check(grid)
    assert res.residual <= 1e-3
    c = (9 / 8) ** 0.25 * np.sqrt(2)
    assert res.closed.values[grid.mid] == pytest.approx(-c * 0.3, abs=1e-14)
    assert res.parity_defect <= 1e-8
    closed = res.closed.values
    assert np.max(np.abs(closed - closed[::-1])) <= 1e-8


def test_kmmvdb_large_eps():
    rep = kmmvdb_check(0.8)
    assert rep.verdict == "repulsive"


def test_figure_curves(grid):
    data = figure1_data([0.0, 0.05, 0.5], grid)
    flat = data[0.0].curve.values
    assert np.max(np.abs(flat)) <= 1e-4
    assert data[0.0].stages == 2 and data[0.5].stages == 1
    c = data[0.05].curve.values
    v3 = tildeV3_closed_form(grid).values
    assert np.max(np.abs(c - 0.05 * v3)) <= 0.15 * 0.05 * np.max(v3)
    for d in data.values():
        v = d.curve.values
        assert max(abs(v[0]), abs(v[-1])) <= 1e-4
    with pytest.raises(InvalidInputError):
        figure1_data([0.95], grid)


def test_figure_enlarges_grid_when_needed(grid):
    d = figure1_data([0.9], grid)[0.9]
    assert d.curve.grid.L > grid.L


def test_worker_count(monkeypatch):
    monkeypatch.setenv("KINKLAB_THREADS", "2")
    assert worker_count(8) == 2
    assert worker_count(1) == 1
    monkeypatch.setenv("KINKLAB_THREADS", "x")
    with pytest.raises(InvalidInputError):
        worker_count(3)


def test_report(grid):
    rep = phi8_report(grid, figure_eps=(0.0, 0.1))
    assert rep.lambda_tilde0_numeric == pytest.approx(2.4, abs=0.05)
    assert rep.stage_counts == {0.0: 2, 0.1: 2}
    assert rep.A0psi_residual <= 1e-3
