"""Perturbative checks for the product family near the quartic double well.

For ``W_eps = (1+eps)^2 (u^2-1)^2 (eps u^2-1)^2 / 4`` the quartic case
``eps = 0`` has ``L_1 = -d^2 + 3 tanh^2(x/sqrt2) - 1`` with eigenvalues
``0`` and ``3/2``. This module measures the first-order shift of the
internal-mode eigenvalue, the first-order correction of the twice
transformed potential ``V_3``, an auxiliary intertwined mode, and the
curves ``V_3 - omega_eps^2`` across ``eps``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .darboux import RepulsivityReport, check_repulsivity, run_cascade
from .errors import CascadeInconsistencyError, InternalConsistencyError, InvalidInputError
from .grid import FULL, ODD, Grid, GridFunction
from .kink import compute_kink
from .model import make_phi4, make_phi_family
from .operator import eigen_decompose, linearized_operator, resolvent_solve

__all__ = [
    "Phi8Report",
    "A0PsiResult",
    "FigureCurve",
    "omega2_eps",
    "odd_eigenvalue",
    "eigenvalue_shift",
    "forward_difference_shift",
    "lambda0_quadrature",
    "tildeV3_closed_form",
    "v3_potential",
    "tildeV3_numeric",
    "a0_psi_check",
    "v2_closed_along_kink",
    "kmmvdb_check",
    "figure1_data",
    "phi8_report",
    "worker_count",
]

LAMBDA0_EXACT = 12.0 / 5.0
DEFAULT_FIGURE_EPS = tuple(round(0.1 * k, 1) for k in range(10))


def worker_count(jobs: int) -> int:
    """Thread count for ``jobs`` independent tasks, capped by ``KINKLAB_THREADS``."""
    cap = os.environ.get("KINKLAB_THREADS")
    try:
        cap = int(cap) if cap else os.cpu_count() or 1
    except ValueError as exc:
        raise InvalidInputError(f"KINKLAB_THREADS must be an integer, got {cap!r}") from exc
    return max(1, min(jobs, cap))


def _pmap(fn, items):
    items = list(items)
    with ThreadPoolExecutor(max_workers=worker_count(len(items))) as ex:
        return list(ex.map(fn, items))


def omega2_eps(eps: float) -> float:
    """``W_eps''(1)``, checked against ``2 - 4 eps^2 + 2 eps^4``."""
    om2 = make_phi_family(eps).omega2
    ref = 2.0 - 4.0 * eps**2 + 2.0 * eps**4
    if abs(om2 - ref) > 1e-12:
        raise InternalConsistencyError(f"omega^2 = {om2} differs from the asymptote {ref}")
    return om2


def _grid_for(eps: float, grid: Grid) -> Grid:
    """Enlarge ``grid`` when the kink tail needs more room.

    The spacing is kept, except for ``eps > 0.85`` where the sharper kink
    core needs half of it.
    """
    need = 15.0 / np.sqrt(omega2_eps(eps))
    h = grid.h / 2.0 if eps > 0.85 else grid.h
    if grid.L >= need and h == grid.h:
        return grid
    L = float(max(grid.L, np.ceil(need / 5.0) * 5.0))
    half = int(round(L / h))
    return Grid(L, 2 * half + 1)


def odd_eigenvalue(eps: float, grid: Grid | None = None) -> float:
    """Extrapolated internal-mode eigenvalue ``lambda_eps^2`` of ``L_1``."""
    grid = grid or Grid()
    kink = compute_kink(make_phi_family(eps), grid)
    spec = eigen_decompose(linearized_operator(kink, ODD))
    pos = spec.eigenvalues[spec.eigenvalues > 0]
    if pos.size == 0:
        raise InvalidInputError(f"no internal mode at eps={eps}")
    return float(pos[0])


def eigenvalue_shift(eps_list, grid: Grid | None = None) -> float:
    """First-order coefficient of ``lambda_eps^2 - 3/2``.

    Fits ``a eps + b eps^2`` by least squares (``a eps`` alone for two
    values) and returns ``a``.
    """
    eps = np.asarray(sorted(set(float(e) for e in eps_list)))
    if eps.size < 2:
        raise InvalidInputError("need at least two distinct eps values")
    if np.any(eps <= 0) or np.any(eps > 0.1):
        raise InvalidInputError("eps values must lie in (0, 0.1]")
    lam = np.array(_pmap(lambda e: odd_eigenvalue(e, grid), eps))
    y = lam - 1.5
    A = np.column_stack([eps, eps**2])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def forward_difference_shift(eps: float = 0.01, grid: Grid | None = None) -> float:
    """``(lambda_eps^2 - 3/2) / eps`` from a single run."""
    if not (0 < eps <= 0.1):
        raise InvalidInputError("eps must lie in (0, 0.1]")
    return (odd_eigenvalue(eps, grid) - 1.5) / eps


def lambda0_quadrature() -> float:
    """``int (-3 + 24 H^2 - 21 H^4) psi_0^2`` with closed-form ``H`` and unit ``psi_0``."""
    def H(x):
        return np.tanh(x / np.sqrt(2.0))

    def psi2(x):
        return (H(x) / np.cosh(x / np.sqrt(2.0))) ** 2

    norm = 2.0 * quad(psi2, 0, 60.0, epsabs=1e-14, epsrel=1e-13)[0]
    val = 2.0 * quad(lambda x: (-3 + 24 * H(x) ** 2 - 21 * H(x) ** 4) * psi2(x),
                     0, 60.0, epsabs=1e-14, epsrel=1e-13)[0]
    return val / norm


def tildeV3_closed_form(grid: Grid | None = None) -> GridFunction:
    """``(6/5) sech^2(x/sqrt2) + (3/5) sech^4(x/sqrt2)``."""
    grid = grid or Grid()
    s2 = 1.0 / np.cosh(grid.x / np.sqrt(2.0)) ** 2
    return GridFunction(grid, 1.2 * s2 + 0.6 * s2**2, FULL)


def v3_potential(eps: float, grid: Grid | None = None) -> GridFunction:
    """Potential after the two Darboux stages of ``L_{1,eps}``.

    Raises
    ------
    CascadeInconsistencyError
        If ``L_{1,eps}`` does not have exactly two eigenvalues below the
        continuum.
    """
    grid = grid or Grid()
    casc = run_cascade(compute_kink(make_phi_family(eps), grid))
    if casc.N_tilde != 2:
        raise CascadeInconsistencyError(f"eps={eps}: {casc.N_tilde} stage(s), two are required")
    return casc.V_D


def tildeV3_numeric(eps: float, grid: Grid | None = None) -> GridFunction:
    """``(V_{3,eps} - omega_eps^2) / eps``."""
    if not (0 < eps <= 0.1):
        raise InvalidInputError("eps must lie in (0, 0.1]")
    V3 = v3_potential(eps, grid)
    return V3.with_values((V3.values - omega2_eps(eps)) / eps)


@dataclass(frozen=True, eq=False)
class A0PsiResult:
    """Intertwined correction ``A*_{1,0} psi~_0`` against its closed form.

    ``residual`` is the sup-distance on ``|x| <= window`` after removing the
    ``sech(x/sqrt2)`` component, the kernel direction left free by the
    deflated solve. ``raw_residual`` omits that projection.
    """

    numeric: GridFunction
    closed: GridFunction
    residual: float
    raw_residual: float
    sech_coefficient: float
    parity_defect: float
    window: float


def _closed_a0psi(x: np.ndarray) -> np.ndarray:
    y = x / np.sqrt(2.0)
    s = 1.0 / np.cosh(y)
    c = (9.0 / 8.0) ** 0.25 * np.sqrt(2.0)
    return -c * s * (1.2 * np.log(np.cosh(y)) - 2.7 * s**2 + 3.0 * s**4)


def a0_psi_check(grid: Grid | None = None, window: float = 10.0) -> A0PsiResult:
    """Solve ``(L_0 - 3/2) psi~ = (27/5 - 24 H^2 + 21 H^4) psi_0`` and apply ``A*``.

    ``psi_0`` is the unit-norm internal mode of the quartic ``L_1`` and
    ``A* = -d/dx + H''/H'``.
    """
    grid = grid or Grid()
    kink = compute_kink(make_phi4(), grid)
    op = linearized_operator(kink, ODD)
    spec = eigen_decompose(op)
    i = int(np.flatnonzero(spec.discrete_eigenvalues > 0)[0])
    lam = float(spec.discrete_eigenvalues[i])
    psi = spec.eigenfunctions[i]
    H = kink.H.restrict_half().values
    rhs = psi.with_values((5.4 - 24 * H**2 + 21 * H**4) * psi.values)
    rhs = rhs - psi * psi.dot(rhs)
    tilde = resolvent_solve(op, lam, rhs, deflate=(lam, psi)).to_full_line(-1).values
    h = grid.h
    d = np.gradient(tilde, h)
    num = -d + kink.log_derivative.values * tilde
    closed = _closed_a0psi(grid.x)
    diff = num - closed
    s = 1.0 / np.cosh(grid.x / np.sqrt(2.0))
    sf = GridFunction(grid, s, FULL)
    a = float(GridFunction(grid, diff, FULL).dot(sf) / sf.norm2())
    mask = np.abs(grid.x) <= window
    res = float(np.max(np.abs(diff - a * s)[mask]))
    raw = float(np.max(np.abs(diff)[mask]))
    par = float(np.max(np.abs(num - num[::-1])))
    return A0PsiResult(GridFunction(grid, num, FULL), GridFunction(grid, closed, FULL),
                       res, raw, a, par, window)


def v2_closed_along_kink(eps: float, grid: Grid | None = None) -> GridFunction:
    """``-W'' + (W')^2 / W`` along the kink, written as ``2 w^2 - W''(H)``.

    ``w = H''/H'`` satisfies ``w^2 = (W')^2 / (2W)`` on the kink, which keeps
    the tails free of the ``0/0`` cancellation.
    """
    grid = grid or Grid()
    kink = compute_kink(make_phi_family(eps), _grid_for(eps, grid))
    w = kink.log_derivative.values
    return GridFunction(kink.grid, 2.0 * w**2 - kink.V1.values, FULL)


def kmmvdb_check(eps: float = 0.8, grid: Grid | None = None) -> RepulsivityReport:
    """Repulsivity of the first transformed potential for ``eps`` near 1."""
    return check_repulsivity(v2_closed_along_kink(eps, grid))


@dataclass(frozen=True, eq=False)
class FigureCurve:
    """``V_D - (2 - 4 eps^2 + 2 eps^4)`` and the number of stages used."""

    eps: float
    curve: GridFunction
    stages: int
    eigenvalues: tuple[float, ...]


def _figure_curve(eps: float, grid: Grid) -> FigureCurve:
    if not (0.0 <= eps <= 0.9):
        raise InvalidInputError("eps must lie in [0, 0.9]")
    g = _grid_for(eps, grid)
    casc = run_cascade(compute_kink(make_phi_family(eps), g))
    off = 2.0 - 4.0 * eps**2 + 2.0 * eps**4
    curve = casc.V_D.with_values(casc.V_D.values - off)
    return FigureCurve(float(eps), curve, casc.N_tilde,
                       tuple(float(v) for v in casc.spectra[0].eigenvalues))


def figure1_data(eps_list=DEFAULT_FIGURE_EPS, grid: Grid | None = None) -> dict:
    """``eps -> FigureCurve`` computed in parallel.

    Each curve is the end of the full cascade; ``stages`` records whether
    that is ``V_3`` (two stages) or only ``V_2`` (one stage, the second
    eigenvalue having entered the continuum). Grids are enlarged at fixed
    spacing when the kink tail requires it.
    """
    grid = grid or Grid()
    eps = [float(e) for e in eps_list]
    if not eps:
        raise InvalidInputError("eps list is empty")
    curves = _pmap(lambda e: _figure_curve(e, grid), eps)
    return {c.eps: c for c in curves}


@dataclass(frozen=True, eq=False)
class Phi8Report:
    """Collected perturbative quantities.

    ``tildeV3_eps`` records the ``eps`` of the numeric first-order potential
    and ``shift_eps`` the regression set.
    """

    lambda_tilde0_numeric: float
    shift_eps: tuple[float, ...]
    tildeV3_numeric: GridFunction
    tildeV3_closed: GridFunction
    tildeV3_eps: float
    A0psi_numeric: GridFunction
    A0psi_closed: GridFunction
    A0psi_residual: float
    figure1_curves: dict = field(default_factory=dict)
    stage_counts: dict = field(default_factory=dict)


def phi8_report(grid: Grid | None = None, shift_eps=(0.005, 0.01, 0.02), v3_eps: float = 0.02,
                figure_eps=DEFAULT_FIGURE_EPS) -> Phi8Report:
    grid = grid or Grid()
    lam0 = eigenvalue_shift(shift_eps, grid)
    v3n = tildeV3_numeric(v3_eps, grid)
    a0 = a0_psi_check(grid)
    fig = figure1_data(figure_eps, grid)
    return Phi8Report(lam0, tuple(shift_eps), v3n, tildeV3_closed_form(grid), float(v3_eps),
                      a0.numeric, a0.closed, a0.residual,
                      {e: c.curve for e, c in fig.items()}, {e: c.stages for e, c in fig.items()})
