import numpy as np
import pytest

from kinklab.errors import CapabilityError, InvalidInputError
from kinklab.model import (PotentialModel, derivative, from_even_coeffs, locate_vacuum,
                           make_phi4, make_phi_family, validate)


def test_phi4_coefficients_and_mass():
    m = make_phi4()
    assert np.allclose(m.coeffs, [0.25, 0.0, -0.5, 0.0, 0.25])
    assert m.zeta == 1.0
    assert m.omega2 == pytest.approx(2.0, abs=1e-14)
    assert validate(m).ok


@pytest.mark.parametrize("eps", [0.0, 0.05, 0.3, 0.9])
def test_family_mass_matches_asymptote(eps):
    m = make_phi_family(eps)
    assert m.omega2 == pytest.approx(2 - 4 * eps**2 + 2 * eps**4, abs=1e-13)
    assert validate(m).ok
    assert m.degree == (4 if eps == 0 else 8)


def test_family_rejects_eps_outside_range():
    with pytest.raises(InvalidInputError):
        make_phi_family(1.0)
    with pytest.raises(InvalidInputError):
        make_phi_family(-0.1)


def test_derivatives_exact():
    m = make_phi_family(0.1)
    u = np.linspace(-1.2, 1.2, 7)
    h = 1e-5
    fd = (m.W(u + h) - m.W(u - h)) / (2 * h)
    assert np.allclose(m.dW(u, 1), fd, atol=1e-8)
    # phi4: W''' = 6u
    assert np.allclose(make_phi4().dW(u, 3), 6 * u, atol=1e-14)
    assert np.all(make_phi4().dW(u, 5) == 0)


def test_capability_limit():
    m = PotentialModel(make_phi4().coeffs, 1.0, max_order=2)
    assert derivative(m, 2, 0.5) == pytest.approx(3 * 0.25 - 1)
    with pytest.raises(CapabilityError):
        derivative(m, 3, 0.5)


def test_vacuum_factor():
    m = make_phi_family(0.2)
    s = np.linspace(0.01, 1.9, 11)
    q = np.polynomial.polynomial.polyval(s, m.vacuum_factor)
    assert np.allclose(m.W(m.zeta - s), s**2 * q, atol=1e-13)
    assert m.vacuum_factor[0] == pytest.approx(m.omega2 / 2, abs=1e-13)


def test_from_even_coeffs_locates_vacuum():
    m = from_even_coeffs([4.0, -4.0, 1.0])      # (u^2 - 2)^2
    assert m.zeta == pytest.approx(np.sqrt(2.0), abs=1e-14)
    assert locate_vacuum(make_phi4().coeffs) == pytest.approx(1.0, abs=1e-14)
    assert validate(m).ok


def test_validate_reports_failures():
    bad = PotentialModel((0.25, 0.1, -0.5, 0.0, 0.25), 1.0)
    rep = validate(bad)
    assert not rep.ok
    assert "W even" in rep.failed()
    neg = PotentialModel((-1.0, 0.0, 1.0), 1.0)
    assert "W>0 on (-zeta,zeta)" in validate(neg).failed()
    assert "FAIL" in str(rep)


def test_model_hashable_and_frozen():
    a, b = make_phi_family(0.1), make_phi_family(0.1)
    assert hash(a) == hash(b) and a == b
    with pytest.raises(Exception):
        a.zeta = 2.0
