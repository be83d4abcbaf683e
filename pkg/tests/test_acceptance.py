"""Acceptance suite: one test and one printed PASS/FAIL line per criterion."""

import time

import numpy as np
import pytest

from kinklab.cli import main
from kinklab.darboux import check_repulsivity, run_cascade
from kinklab.grid import Grid, GridFunction
from kinklab.kink import compute_kink
from kinklab.model import make_phi4
from kinklab.operator import eigen_decompose, linearized_operator
from kinklab.phi8 import eigenvalue_shift, tildeV3_closed_form, tildeV3_numeric
from kinklab.profile import compute_rmin_sources, fgr_coefficient, profile_orthogonality_check
from kinklab.resonance import MultiIndex, enumerate_sets
from kinklab.scattering import (compute_jost, continuum_mass, distorted_ft, gauss_legendre_jost,
                                plain_ft)

from oracles import brute_force_sets, phi4_fgr_oracle, random_configs


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {n}: {detail}"
    return emit


def _tuples(ms):
    return {(m.plus, m.minus) for m in ms}


def test_criterion_01_kink_exactness(report):
    t0 = time.perf_counter()
    kink = compute_kink(make_phi4(), Grid(30.0, 6001))
    dt = time.perf_counter() - t0
    x = kink.grid.x
    m = np.abs(x) <= 20
    err = np.max(np.abs(kink.H.values - np.tanh(x / np.sqrt(2)))[m])
    report(1, err <= 1e-8 and dt < 2.0, f"sup error {err:.2e}, runtime {dt:.3f} s")


def test_criterion_02_internal_mode(report, phi4_kink, phi4_odd_spectrum):
    odd = phi4_odd_spectrum.eigenvalues
    full = eigen_decompose(linearized_operator(phi4_kink)).eigenvalues
    ok = (odd.size == 1 and abs(odd[0] - 1.5) <= 1e-6 and full.size == 2
          and np.max(np.abs(full - [0.0, 1.5])) <= 1e-6)
    report(2, ok, f"odd {np.round(odd, 12).tolist()}, full {np.round(full, 12).tolist()}")


def test_criterion_03_cascade_endpoint(report, phi4_kink, grid):
    casc = run_cascade(phi4_kink)
    dev = np.max(np.abs(casc.V_D.values - 2.0)[np.abs(grid.x) <= 15])
    report(3, casc.N_tilde == 2 and dev <= 1e-4, f"stages {casc.N_tilde}, max|V_D-2| {dev:.2e}")


def test_criterion_04_eigenvalue_shift(report):
    val = eigenvalue_shift([0.005, 0.01, 0.02])
    report(4, abs(val - 2.4) <= 0.05, f"regression slope {val:.5f}")


def test_criterion_05_tildeV3(report, grid):
    cf = tildeV3_closed_form(grid).values
    d02 = np.max(np.abs(tildeV3_numeric(0.02, grid).values - cf))
    d01 = np.max(np.abs(tildeV3_numeric(0.01, grid).values - cf))
    report(5, d02 <= 0.05 and d01 <= 0.03, f"sup error {d02:.4f} at 0.02, {d01:.4f} at 0.01")


def test_criterion_06_repulsivity(report, phi8_kinks, phi4_kink):
    parts, ok = [], True
    for eps, kink in sorted(phi8_kinks.items()):
        rep = check_repulsivity(run_cascade(kink).V_D)
        ok &= rep.verdict == "repulsive" and rep.max_xVp <= 1e-6 and rep.min_xVp < -1e-3
        parts.append(f"eps={eps}: {rep.verdict} (max {rep.max_xVp:.1e}, min {rep.min_xVp:.1e})")
    phi4 = check_repulsivity(run_cascade(phi4_kink).V_D).verdict
    ok &= phi4 == "flat_degenerate"
    report(6, ok, "; ".join(parts) + f"; phi4: {phi4}")


def test_criterion_07_resonance_sets(report, phi4_structure):
    bad = 0
    configs = random_configs()
    for lam, omega in configs:
        st = enumerate_sets(lam, omega)
        M, rmin, nr, _ = brute_force_sets(lam, omega)
        bad += not (st.M == M and _tuples(st.R_min) == rmin and _tuples(st.NR) == nr)
    phi4_ok = (_tuples(phi4_structure.R_min) == {((2,), (0,)), ((0,), (2,))}
               and _tuples(phi4_structure.NR) == {((0,), (0,)), ((1,), (0,)), ((0,), (1,)),
                                                   ((1,), (1,))})
    report(7, bad == 0 and phi4_ok and len(configs) == 50,
           f"{len(configs) - bad}/{len(configs)} random configurations agree; phi4 sets "
           f"{'match' if phi4_ok else 'differ'}")


def test_criterion_08_scattering(report, phi4_kink, grid):
    ks = np.array([0.5, 1.0, np.sqrt(2), 2.0, 5.0])
    x = grid.x
    free = compute_jost(GridFunction(grid, np.full(grid.n, 2.0)), 2.0, ks)
    g = GridFunction(grid, np.exp(-x**2) * (1 + 0.3 * x))
    ft_err = np.max(np.abs(distorted_ft(g, free, ks) - plain_ft(g, ks)))
    wvar = np.max(compute_jost(phi4_kink.V1, 2.0, ks).wronskian_variation)
    sd = eigen_decompose(linearized_operator(phi4_kink))
    jost, w = gauss_legendre_jost(phi4_kink.V1, 2.0)
    worst = 0.0
    for vals in (np.exp(-x**2), x * np.exp(-x**2 / 2), (1 + x) / np.cosh(x) ** 2,
                 np.exp(-(x - 1) ** 2), np.tanh(x) / np.cosh(x)):
        f = GridFunction(grid, vals)
        bound = sum(abs(e.dot(f)) ** 2 for e in sd.eigenfunctions)
        worst = max(worst, abs((continuum_mass(f, jost, w) + bound) / f.norm2() - 1))
    report(8, ft_err <= 1e-6 and worst <= 1e-4 and wvar <= 1e-8,
           f"free FT {ft_err:.1e}, Plancherel {worst:.1e}, Wronskian variation {wvar:.1e}")


def test_criterion_09_fgr(report, phi4_kink, phi4_profile):
    src = compute_rmin_sources(phi4_profile)
    rep = fgr_coefficient(src, phi4_profile, compute_jost(phi4_kink.V1, 2.0, [np.sqrt(2.0)]))
    e = rep[MultiIndex.parse("(2,0)")]
    oracle = phi4_fgr_oracle()
    rel = abs(e.gamma - oracle) / oracle
    ok = (e.gamma > 0 and rel <= 1e-3 and abs(e.k - np.sqrt(2)) <= 1e-9
          and abs(e.r - 2) <= 1e-9)
    report(9, ok, f"gamma {e.gamma:.10f}, oracle {oracle:.10f}, relative {rel:.1e}, k {e.k:.10f}")


def test_criterion_10_profile(report, phi4_profile):
    worst = max(phi4_profile.residuals.values())
    src = compute_rmin_sources(phi4_profile)
    vals = [profile_orthogonality_check(phi4_profile, [s * np.exp(0.4j)], src)
            for s in (0.02, 0.01, 0.005)]
    slopes = np.log2(np.array(vals[:-1]) / np.array(vals[1:]))
    ok = phi4_profile.order == 2 and worst <= 1e-4 and np.all(np.abs(slopes - 3) <= 0.3)
    report(10, ok, f"max relative residual {worst:.1e}, halving slopes "
                   f"{', '.join(f'{s:.3f}' for s in slopes)}")


def test_criterion_11_dynamics_out_of_scope(report, tmp_path, capsys):
    # long-time decay of the mode amplitudes is not simulated; the hypotheses it rests on are
    code = main(["certify", "--eps", "0.05", "--out", str(tmp_path)])
    capsys.readouterr()
    report(11, code == 0, "time decay not simulated (out of scope); certify phi8 eps=0.05 "
                          f"hypotheses exit code {code}")
