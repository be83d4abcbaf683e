"""Darboux cascade removing the discrete spectrum of ``L_1``.

With ``A = psi^{-1} d/dx (psi .)`` built on the ground state ``psi`` of
``L_k`` at eigenvalue ``lam``, ``L_k = A A^* + lam`` and
``L_{k+1} = A^* A + lam`` share their spectra except for ``lam``. The
potentials are related by

    V_{k+1} = V_k - 2 (log psi)''.

Stage one uses the kink derivative ``H'`` at ``lam = 0``. Its log
derivative is known in closed form, so the Riccati identity
``V_2 = 2 lam - V_1 + 2 w**2`` is used there. Later stages differentiate
``log psi`` with the centered second difference, which is exact on
discrete exponential tails.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import CascadeInconsistencyError, GroundStateError, InvalidInputError
from .grid import FULL, GridFunction
from .kink import KinkData
from .operator import (SchrodingerOperator, SpectralData, eigen_decompose, ground_state,
                       linearized_operator, sign_changes)

__all__ = [
    "Stage",
    "DarbouxCascade",
    "RepulsivityReport",
    "darboux_step",
    "run_cascade",
    "check_repulsivity",
    "intertwine_residual",
    "centered_derivative",
]

_TAIL_REL = 1e-12


def centered_derivative(v: np.ndarray, h: float) -> np.ndarray:
    """Centered first difference; the two end entries are left at zero."""
    out = np.zeros_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    return out


def _log_with_tails(psi: np.ndarray) -> np.ndarray:
    """``log psi`` with sub-threshold tails continued linearly.

    Where ``psi < 1e-12 max(psi)`` the samples carry no relative accuracy;
    there the logarithm is continued with the slope of the last trusted
    pair, i.e. by the exponential asymptote of a bound state.
    """
    good = psi > _TAIL_REL * np.max(psi)
    idx = np.flatnonzero(good)
    lo, hi = idx[0], idx[-1]
    if hi - lo < 2 or np.any(~good[lo:hi + 1]):
        raise GroundStateError("ground state vanishes inside its support")
    out = np.empty_like(psi, dtype=float)
    out[lo:hi + 1] = np.log(psi[lo:hi + 1])
    if lo > 0:
        slope = out[lo + 1] - out[lo]
        out[:lo] = out[lo] - slope * np.arange(lo, 0, -1)
    if hi < psi.size - 1:
        slope = out[hi] - out[hi - 1]
        out[hi + 1:] = out[hi] + slope * np.arange(1, psi.size - hi)
    return out


def _rayleigh_residual(V: GridFunction, psi: GridFunction, lam: float | None) -> tuple[float, float]:
    op = SchrodingerOperator(V)
    p = psi.with_values(np.real(psi.values))
    p_int = p.with_values(np.concatenate([[0.0], p.values[1:-1], [0.0]]))
    Lp = op.apply(p_int)
    if lam is None:
        lam = float(np.real(p_int.dot(Lp)) / p_int.norm2())
    r = Lp - p_int * lam
    r.values[0] = r.values[-1] = 0.0
    # drop the rows next to the ends, which see the Dirichlet zero
    r.values[1] = r.values[-2] = 0.0
    return lam, r.norm() / p_int.norm()


def darboux_step(V: GridFunction, psi: GridFunction, eigenvalue: float | None = None,
                 log_derivative: GridFunction | None = None,
                 residual_tol: float = 1e-3) -> GridFunction:
    """Potential of the Darboux-transformed operator.

    Parameters
    ----------
    V : GridFunction
        Full-line potential ``V_k``.
    psi : GridFunction
        Ground state of ``-d^2 + V_k``; must not change sign.
    eigenvalue : float, optional
        Eigenvalue of ``psi``. Estimated by a Rayleigh quotient if omitted.
    log_derivative : GridFunction, optional
        Exact ``psi'/psi``. When given, the Riccati form is used.
    residual_tol : float
        Maximal relative eigen-residual accepted for ``psi``.

    Raises
    ------
    GroundStateError
        If ``psi`` changes sign or is not an eigenfunction of ``V``.
    """
    if V.sector != FULL or psi.sector != FULL:
        raise InvalidInputError("darboux_step works on full-line functions")
    p = np.real(psi.values)
    if sign_changes(p[1:-1], rel_tol=1e-10) != 0:
        raise GroundStateError("psi changes sign: not a ground state")
    if np.sum(p) < 0:
        p = -p
    psi = psi.with_values(p)
    lam, res = _rayleigh_residual(V, psi, eigenvalue)
    if res > residual_tol * max(1.0, abs(lam)):
        raise GroundStateError(f"psi is not an eigenfunction: relative residual {res:.2e}")
    Vv = V.values
    if log_derivative is not None:
        w = log_derivative.values
        return V.with_values(2.0 * lam - Vv + 2.0 * w**2)
    h = V.grid.h
    lp = _log_with_tails(p)
    out = Vv.copy()
    out[1:-1] = Vv[1:-1] - 2.0 * (lp[2:] - 2.0 * lp[1:-1] + lp[:-2]) / h**2
    out[0] = Vv[0] + (out[1] - Vv[1])
    out[-1] = Vv[-1] + (out[-2] - Vv[-2])
    return V.with_values(out)


@dataclass(frozen=True, eq=False)
class Stage:
    """One factorization step: potential, its ground state and eigenvalue."""

    V: GridFunction
    psi: GridFunction
    lambda_tilde_sq: float
    log_derivative: GridFunction


@dataclass(frozen=True, eq=False)
class DarbouxCascade:
    """All stages of the cascade and the final potential ``V_D``.

    ``spectra[k]`` is the discrete spectrum of ``-d^2 + V_{k+1}``, so
    ``spectra[0]`` belongs to ``L_1`` and ``spectra[-1]`` to ``L_D``.
    """

    stages: list
    V_D: GridFunction
    V1: GridFunction
    N_tilde: int
    spectra: list = field(default_factory=list)
    eigenvalue_shifts: list = field(default_factory=list)

    @property
    def potentials(self) -> list:
        return [s.V for s in self.stages] + [self.V_D]

    def decay_rate(self, omega2: float | None = None) -> float:
        """Fitted exponential decay rate of ``|V_D - omega2|``."""
        om2 = self.V_D.values[-1] if omega2 is None else omega2
        x = self.V_D.x
        dev = np.abs(self.V_D.values - om2)
        m = (np.abs(x) > 2.0) & (dev > 1e-9 * max(dev.max(), 1e-300))
        if np.count_nonzero(m) < 4 or dev.max() < 1e-12:
            return np.inf
        return float(-np.polyfit(np.abs(x[m]), np.log(dev[m]), 1)[0])


def run_cascade(source: KinkData | SchrodingerOperator, margin: float = 1e-3,
                check: bool = True) -> DarbouxCascade:
    """Remove all full-line eigenvalues below ``omega2 - margin``.

    Parameters
    ----------
    source : KinkData or SchrodingerOperator
        For kink data the first stage uses ``H'`` with its exact log
        derivative; a bare operator is peeled with numerical ground states.
    check : bool
        Re-run the eigensolver after every stage and require the count to
        drop by exactly one.

    Raises
    ------
    CascadeInconsistencyError
        If a stage does not remove exactly one eigenvalue.
    """
    if isinstance(source, KinkData):
        op = linearized_operator(source, FULL)
        kink = source
    else:
        op = source.in_sector(FULL)
        kink = None
    spec = eigen_decompose(op, margin=margin)
    n_tilde = len(spec)
    V = op.V
    V1 = V
    stages = []
    spectra = [spec]
    shifts = []
    for k in range(n_tilde):
        if k == 0 and kink is not None:
            lam = 0.0
            hp = kink.Hprime
            psi = hp * (1.0 / hp.norm())
            w = kink.log_derivative
        else:
            cur = SchrodingerOperator(V)
            lam, psi = ground_state(cur)
            lp = _log_with_tails(psi.values)
            w = psi.with_values(centered_derivative(lp, V.grid.h))
            w.values[0], w.values[-1] = w.values[1], w.values[-2]
        V_next = darboux_step(V, psi, lam, log_derivative=w if k == 0 and kink is not None else None)
        stages.append(Stage(V, psi, float(lam), w))
        V = V_next
        if check or k == n_tilde - 1:
            new = eigen_decompose(SchrodingerOperator(V), margin=margin)
            prev = spectra[-1]
            if len(new) != len(prev) - 1:
                raise CascadeInconsistencyError(
                    f"stage {k + 1}: eigenvalue count went from {len(prev)} to {len(new)}")
            shift = float(np.max(np.abs(new.eigenvalues - prev.eigenvalues[1:]))) if len(new) else 0.0
            shifts.append(shift)
            spectra.append(new)
    return DarbouxCascade(stages, V, V1, n_tilde, spectra, shifts)


@dataclass(frozen=True)
class RepulsivityReport:
    """Sign analysis of ``x V_D'(x)``.

    ``verdict`` is ``"repulsive"`` when ``max_xVp <= tol`` and
    ``min_xVp < -activity``, ``"flat_degenerate"`` when ``|x V_D'|`` never
    exceeds ``activity``, and ``"fails"`` otherwise.
    """

    max_xVp: float
    min_xVp: float
    argmax_x: float
    argmin_x: float
    tol: float
    activity: float
    verdict: str
    km22_negative_eigencount: int | None = None
    gamma: float | None = None

    @property
    def repulsive(self) -> bool:
        return self.verdict == "repulsive"


def check_repulsivity(V_D: GridFunction, tol: float | None = None, activity: float = 1e-3,
                      gamma: float | None = None) -> RepulsivityReport:
    """Check ``x V_D'(x) <= 0`` on the interior nodes.

    Parameters
    ----------
    tol : float, optional
        Allowed positive excursion; default ``1e-6 * max|V_D'| * L``.
    activity : float
        ``x V_D'`` must dip below ``-activity`` somewhere to count as
        non-flat.
    gamma : float, optional
        If given (``0 <= gamma < 1``), also count negative eigenvalues of
        ``-(1-gamma) d^2 - x V_D' / sqrt(2)``.
    """
    if V_D.sector != FULL:
        V_D = V_D.to_full_line(parity=+1)
    g = V_D.grid
    dV = centered_derivative(V_D.values, g.h)
    x = g.x
    xv = (x * dV)[1:-1]
    xi = x[1:-1]
    if tol is None:
        tol = 1e-6 * float(np.max(np.abs(dV))) * g.L
    imax, imin = int(np.argmax(xv)), int(np.argmin(xv))
    mx, mn = float(xv[imax]), float(xv[imin])
    if mx <= tol and mn < -activity:
        verdict = "repulsive"
    elif max(abs(mx), abs(mn)) <= activity:
        verdict = "flat_degenerate"
    else:
        verdict = "fails"
    count = None
    if gamma is not None:
        if not (0.0 <= gamma < 1.0):
            raise InvalidInputError("gamma must lie in [0, 1)")
        d = 2.0 * (1.0 - gamma) / g.h**2 - xv / np.sqrt(2.0)
        e = np.full(d.size - 1, -(1.0 - gamma) / g.h**2)
        lo = float(np.min(d)) - 4.0 / g.h**2 - 1.0
        count = len(eigh_tridiagonal(d, e, eigvals_only=True, select="v", select_range=(lo, 0.0)))
    return RepulsivityReport(mx, mn, float(xi[imax]), float(xi[imin]), float(tol), float(activity),
                             verdict, count, gamma)


def _apply_adjoint(stage: Stage, f: np.ndarray, h: float) -> np.ndarray:
    """``A^* f = -f' + (psi'/psi) f``."""
    return -centered_derivative(f, h) + stage.log_derivative.values * f


def intertwine_residual(cascade: DarbouxCascade, L1: SchrodingerOperator | None,
                        f: GridFunction) -> float:
    """Relative defect of ``A^* L_1 f = L_D A^* f`` with ``A^* = A_N^* ... A_1^*``."""
    if f.norm() == 0:
        return 0.0
    L1 = L1 or SchrodingerOperator(cascade.V1)
    LD = SchrodingerOperator(cascade.V_D)
    h = f.grid.h

    def adj(v):
        for st in cascade.stages:
            v = _apply_adjoint(st, v, h)
        return v

    lhs = adj(L1.apply(f).values)
    rhs = LD.apply(f.with_values(adj(f.values))).values
    r = lhs - rhs
    pad = 2 * max(1, len(cascade.stages)) + 2
    r[:pad] = 0.0
    r[-pad:] = 0.0
    return f.with_values(r).norm() / f.norm()
