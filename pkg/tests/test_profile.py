import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from kinklab.errors import DependencyError, InvalidInputError
from kinklab.grid import ODD, Grid, GridFunction
from kinklab.kink import compute_kink
from kinklab.model import from_even_coeffs
from kinklab.operator import eigen_decompose, linearized_operator
from kinklab.profile import (build_refined_profile, compute_rmin_sources, discrete_projection,
                             fgr_coefficient, profile_orthogonality_check)
from kinklab.resonance import MultiIndex, enumerate_sets
from kinklab.scattering import compute_jost

from oracles import phi4_fgr_oracle

M20 = MultiIndex.parse("(2,0)")
M02 = MultiIndex.parse("(0,2)")
M11 = MultiIndex.parse("(1,1)")


@pytest.fixture(scope="module")
def phi4_sources(phi4_profile):
    return compute_rmin_sources(phi4_profile)


@pytest.fixture(scope="module")
def phi4_fgr(phi4_kink, phi4_profile, phi4_sources):
    jost = compute_jost(phi4_kink.V1, 2.0, [np.sqrt(2.0)])
    return fgr_coefficient(phi4_sources, phi4_profile, jost)


@pytest.fixture(scope="module")
def two_mode():
    """``W = (1-u^2)^2 (u^2 + 1/5) / 2``: two odd modes, M = 3."""
    c = 0.5 * P.polymul(P.polymul([1, 0, -1], [1, 0, -1]), [0.2, 0, 1])
    model = from_even_coeffs(c[::2].tolist())
    kink = compute_kink(model, Grid(40.0, 8001))
    sd = eigen_decompose(linearized_operator(kink, ODD))
    st = enumerate_sets(sd.lambdas, model.omega)
    return model, kink, sd, st, build_refined_profile(model, kink, sd, st)


def test_phi4_profile_contents(phi4_profile):
    p = phi4_profile
    assert p.order == 2
    assert set(p.phi) == {MultiIndex.zero(1), MultiIndex.unit(0, 1), MultiIndex.unit(0, 1, True), M11}
    # only the base frequency, no correction at order 2
    assert list(p.lambda_jm) == [(0, MultiIndex.unit(0, 1))]
    Phi = p.Phi(0)
    assert np.array_equal(p.phi[MultiIndex.unit(0, 1)][0], Phi[0])
    assert np.array_equal(p.phi[MultiIndex.unit(0, 1)][1], Phi[1])


def test_phi4_residuals(phi4_profile):
    assert max(phi4_profile.residuals.values()) <= 1e-4
    assert max(phi4_profile.scalar_residuals.values()) <= 1e-9


def test_phi4_self_conjugate_index_is_real(phi4_profile):
    a, b = phi4_profile.phi[M11]
    assert np.max(np.abs(a.imag)) <= 1e-8 and np.max(np.abs(b.imag)) <= 1e-8


def test_phi4_source_closed_form(phi4_profile, phi4_sources):
    phi1 = phi4_profile.modes[0]
    R = phi4_sources[M20]
    assert np.max(np.abs(R[0])) == 0.0
    assert np.max(np.abs(R[1] - (-3 * phi4_profile.H * phi1**2))) <= 1e-14
    Rc = phi4_sources[M02]
    assert np.max(np.abs(Rc[1] - np.conj(R[1]))) <= 1e-14


def test_phi4_source_decays(phi4_profile, phi4_sources):
    x = phi4_profile.grid.nodes(ODD)
    weighted = np.abs(phi4_sources[M20][1]) * np.exp(np.sqrt(2) * x / 2)
    assert np.max(weighted) < 10.0


def test_phi4_fgr_matches_oracle(phi4_fgr):
    e = phi4_fgr[M20]
    assert e.r == pytest.approx(2.0, rel=1e-9)
    assert e.k == pytest.approx(np.sqrt(2.0), rel=1e-9)
    assert e.gamma == pytest.approx(phi4_fgr_oracle(), rel=1e-3)
    assert e.gamma_projected == pytest.approx(e.gamma, rel=1e-3)
    assert e.nondegenerate and phi4_fgr.nondegenerate
    assert phi4_fgr[M02].gamma == pytest.approx(e.gamma, rel=1e-12)


def test_fgr_dispersion_convention(phi4_kink, phi4_profile, phi4_sources):
    jost = compute_jost(phi4_kink.V1, 2.0, [2.0])
    rep = fgr_coefficient(phi4_sources, phi4_profile, jost, convention="dispersion")
    assert rep[M20].k == pytest.approx(2.0)
    assert rep[M20].gamma > 0
    with pytest.raises(InvalidInputError):
        fgr_coefficient(phi4_sources, phi4_profile, jost, convention="other")


def test_fgr_zero_source(phi4_kink, phi4_profile, phi4_sources):
    z = np.zeros_like(phi4_sources[M20][0])
    jost = compute_jost(phi4_kink.V1, 2.0, [np.sqrt(2.0)])
    rep = fgr_coefficient({M20: (z, z)}, phi4_profile, jost)
    assert rep[M20].gamma == 0.0 and not rep[M20].nondegenerate


def test_projection_removes_modes(phi4_profile):
    P1 = phi4_profile.Phi(0)
    p = discrete_projection(phi4_profile, P1)
    assert np.max(np.abs(p[0] - P1[0])) <= 1e-12
    assert np.max(np.abs(p[1] - P1[1])) <= 1e-12


def test_orthogonality_scaling_phi4(phi4_profile, phi4_sources):
    assert profile_orthogonality_check(phi4_profile, [0.0], phi4_sources) == 0.0
    vals = [profile_orthogonality_check(phi4_profile, [s * np.exp(0.4j)], phi4_sources)
            for s in (0.02, 0.01, 0.005)]
    slopes = np.log2(np.array(vals[:-1]) / np.array(vals[1:]))
    assert np.all(np.abs(slopes - 3.0) <= 0.3)


def test_dependency_error(phi4, phi4_kink, phi4_odd_spectrum, phi4_structure, two_mode):
    p1 = build_refined_profile(phi4, phi4_kink, phi4_odd_spectrum, phi4_structure, order=1)
    assert compute_rmin_sources(p1)   # order-2 sources need only order 1
    model, kink, sd, st, _ = two_mode
    low = build_refined_profile(model, kink, sd, st, order=1)
    with pytest.raises(DependencyError):
        compute_rmin_sources(low)     # (3,0)-type sources need order 2


def test_order_above_M_rejected(phi4, phi4_kink, phi4_odd_spectrum, phi4_structure):
    with pytest.raises(InvalidInputError):
        build_refined_profile(phi4, phi4_kink, phi4_odd_spectrum, phi4_structure, order=3)


def test_two_mode_profile_invariants(two_mode):
    model, kink, sd, st, p = two_mode
    assert st.M == 3 and p.order == 3
    assert max(p.residuals.values()) <= 1e-4
    # a genuine frequency correction appears at order 3, real and conjugation consistent
    m = MultiIndex.parse("((2,1),(0,0))")
    assert (0, m) in p.lambda_jm
    assert p.lambda_jm[(0, m)] == pytest.approx(p.lambda_conj[(0, m)], abs=1e-8)
    for mi, (a, b) in p.phi.items():
        c = p.phi[mi.conj]
        assert np.max(np.abs(c[0] - np.conj(a))) <= 1e-8
        assert np.max(np.abs(c[1] - np.conj(b))) <= 1e-8


def test_two_mode_correction_cancels_resonant_term(two_mode):
    """The z1^2 conj(z1) coefficient of the field residual vanishes to higher order."""
    *_, p = two_mode

    def coefficient(r):
        th = 2 * np.pi * np.arange(8) / 8
        acc = sum(np.exp(-1j * t) * p.residual(np.array([r * np.exp(1j * t), 0.0]))[1] for t in th)
        return np.max(np.abs(acc / 8))

    c1, c2 = coefficient(0.1), coefficient(0.05)
    assert c2 / 0.05**3 < 0.1
    assert c1 / c2 > 20          # O(r^5) rather than O(r^3)


def test_two_mode_fgr_and_orthogonality(two_mode):
    model, kink, sd, st, p = two_mode
    src = compute_rmin_sources(p)
    assert set(src) == set(st.R_min)
    ks = sorted({float(np.sqrt(np.sqrt(m.dot(st.lambdas) ** 2 - model.omega2))) for m in src})
    rep = fgr_coefficient(src, p, compute_jost(kink.V1, model.omega2, ks))
    for e in rep.entries:
        assert e.gamma >= 0
        assert rep[e.m.conj].gamma == pytest.approx(e.gamma, rel=1e-12)
    z = lambda s: s * np.array([np.exp(0.3j), 0.7 * np.exp(-1.1j)])
    v = [profile_orthogonality_check(p, z(s), src) for s in (0.01, 0.005)]
    assert 6.0 < v[0] / v[1] < 12.0      # smallest R_min order is 2, so |z|^3
