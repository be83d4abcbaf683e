"""Jost solutions, transmission coefficient and the distorted Fourier transform.

For ``-u'' + (V - omega2) u = k^2 u`` the Jost solutions are
``f_+ = e^{ikx} m_+`` and ``f_- = e^{-ikx} m_-``, with ``m_+ -> 1`` as
``x -> +inf`` and ``m_- -> 1`` as ``x -> -inf``. The modified functions
solve

    m_+'' = -2ik m_+' + (V - omega2) m_+,   integrated from x = +L down,
    m_-'' = +2ik m_-' + (V - omega2) m_-,   integrated from x = -L up,

by classical RK4, vectorized over ``k``. Potential values at half steps
come from a cubic spline of the samples.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .errors import DomainTooSmallError, InvalidInputError
from .grid import FULL, ODD, Grid, GridFunction

__all__ = [
    "JostData",
    "default_k_grid",
    "compute_jost",
    "edge_resonance_check",
    "distorted_ft",
    "plain_ft",
    "continuum_mass",
    "gauss_legendre_jost",
]

_EDGE_TOL = 1e-10


def default_k_grid(omega: float, n: int = 200) -> np.ndarray:
    """``n`` log-spaced wavenumbers in ``[1e-3, 20 omega]``."""
    return np.geomspace(1e-3, 20.0 * omega, n)


def _integrate(grid: Grid, q: np.ndarray, k: np.ndarray, sign: int, substeps: int):
    """Modified Jost function and derivative on all nodes, one column per k."""
    n = grid.n
    x = grid.x
    hs = grid.h / substeps
    fine = CubicSpline(x, q)(np.linspace(-grid.L, grid.L, substeps * (n - 1) * 2 + 1))
    if sign > 0:
        fine = fine[::-1]
    step = -hs if sign > 0 else hs
    c = -2j * k * sign
    m = np.ones(k.size, dtype=complex)
    mp = np.zeros(k.size, dtype=complex)
    M = np.empty((n, k.size), dtype=complex)
    MP = np.empty((n, k.size), dtype=complex)
    order = np.arange(n - 1, -1, -1) if sign > 0 else np.arange(n)
    M[order[0]] = m
    MP[order[0]] = mp
    half = 0.5 * step
    for i in range(1, n):
        for s in range(substeps):
            j = 2 * ((i - 1) * substeps + s)
            q0, qm, q1 = fine[j], fine[j + 1], fine[j + 2]
            a1, b1 = mp, c * mp + q0 * m
            a2, b2 = mp + half * b1, c * (mp + half * b1) + qm * (m + half * a1)
            a3, b3 = mp + half * b2, c * (mp + half * b2) + qm * (m + half * a2)
            a4, b4 = mp + step * b3, c * (mp + step * b3) + q1 * (m + step * a3)
            m = m + step / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            mp = mp + step / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        M[order[i]] = m
        MP[order[i]] = mp
    return M, MP


@dataclass(frozen=True, eq=False)
class JostData:
    """Jost solutions on a full-line grid for a set of wavenumbers.

    Attributes
    ----------
    m_plus, m_minus : ndarray, shape (n, nk)
        Modified Jost functions.
    dm_plus, dm_minus : ndarray, shape (n, nk)
        Their ``x`` derivatives.
    T, R : ndarray
        Transmission and (left-incidence) reflection coefficients.
    wronskian : ndarray
        ``W(f_-, f_+)`` evaluated at ``x = 0``.
    wronskian_variation : ndarray
        ``max_x |W(x) - W(0)| / |W(0)|`` per ``k``.
    wronskian0 : complex or None
        Linear extrapolation of ``W`` to ``k = 0`` from the two smallest
        wavenumbers (None if fewer than two).
    """

    V: GridFunction
    omega2: float
    k_grid: np.ndarray
    m_plus: np.ndarray
    m_minus: np.ndarray
    dm_plus: np.ndarray
    dm_minus: np.ndarray
    T: np.ndarray
    R: np.ndarray
    wronskian: np.ndarray
    wronskian_variation: np.ndarray
    wronskian0: complex | None
    substeps: int = 1

    @property
    def grid(self) -> Grid:
        return self.V.grid

    def index(self, k: float) -> int | None:
        hit = np.flatnonzero(np.abs(self.k_grid - abs(k)) <= 1e-12 * max(1.0, abs(k)))
        return int(hit[0]) if hit.size else None

    def at(self, k) -> "JostData":
        """Jost data for other wavenumbers on the same potential."""
        return compute_jost(self.V, self.omega2, np.abs(np.atleast_1d(k)), substeps=self.substeps)


def compute_jost(V: GridFunction, omega2: float, k_grid=None, substeps: int = 1,
                 allow_negative: bool = False) -> JostData:
    """Integrate the modified Jost equations for every ``k`` in ``k_grid``.

    Raises
    ------
    DomainTooSmallError
        If ``|V - omega2|`` exceeds 1e-10 at either grid edge.
    InvalidInputError
        If a wavenumber is not positive (unless ``allow_negative``).
    """
    if V.sector != FULL:
        V = V.to_full_line(parity=+1)
    k = default_k_grid(np.sqrt(omega2)) if k_grid is None else np.atleast_1d(np.asarray(k_grid, float))
    if k.size == 0 or not np.all(np.isfinite(k)):
        raise InvalidInputError("k_grid must be a non-empty array of finite wavenumbers")
    if np.any(k == 0) or (not allow_negative and np.any(k <= 0)):
        raise InvalidInputError("wavenumbers must be positive")
    q = V.values - omega2
    edge = max(abs(q[0]), abs(q[-1]))
    if edge > _EDGE_TOL:
        raise DomainTooSmallError(f"|V - omega2| = {edge:.2e} at the grid edge exceeds {_EDGE_TOL:g}")
    g = V.grid
    Mp, MPp = _integrate(g, q, k, +1, substeps)
    Mm, MPm = _integrate(g, q, k, -1, substeps)
    Wx = Mm * (MPp + 1j * k * Mp) - (MPm - 1j * k * Mm) * Mp
    W0 = Wx[g.mid]
    var = np.max(np.abs(Wx - W0), axis=0) / np.abs(W0)
    T = 2j * k / W0
    # f_- at the right edge written as alpha e^{-ikx} + beta e^{ikx}
    L = g.L
    f = np.exp(-1j * k * L) * Mm[-1]
    fp = np.exp(-1j * k * L) * (MPm[-1] - 1j * k * Mm[-1])
    alpha = (1j * k * f - fp) / (2j * k) * np.exp(1j * k * L)
    beta = (1j * k * f + fp) / (2j * k) * np.exp(-1j * k * L)
    R = beta / alpha
    w0 = None
    if k.size >= 2:
        i1, i2 = np.argsort(np.abs(k))[:2]
        w0 = complex(W0[i1] - k[i1] * (W0[i2] - W0[i1]) / (k[i2] - k[i1]))
    return JostData(V, float(omega2), k, Mp, Mm, MPp, MPm, T, R, W0, var, w0, substeps)


def edge_resonance_check(jost: JostData, threshold: float = 1e-3) -> bool:
    """True iff the Wronskian extrapolated to ``k = 0`` stays away from zero.

    A vanishing limit signals a bounded solution at the continuum edge
    (threshold resonance).
    """
    if np.min(jost.k_grid) > 1e-3:
        raise InvalidInputError("edge check needs a wavenumber <= 1e-3 in k_grid")
    if jost.wronskian0 is None:
        raise InvalidInputError("edge check needs at least two wavenumbers")
    return bool(abs(jost.wronskian0) >= threshold)


def _as_full(g: GridFunction, parity: int) -> GridFunction:
    return g.to_full_line(parity) if g.sector == ODD else g


def _check_decay(g: np.ndarray):
    peak = np.max(np.abs(g))
    if peak > 0 and max(abs(g[0]), abs(g[-1])) > 1e-8 * peak:
        warnings.warn("integrand does not decay at the grid edges; transform may be inaccurate",
                      RuntimeWarning, stacklevel=3)


def distorted_ft(g: GridFunction, jost: JostData, k, parity: int = -1):
    """``(2 pi)^{-1/2} int conj(e(x, k)) g(x) dx`` for signed ``k``.

    ``e(x, k) = T(k) e^{ikx} m_+(x, k)`` for ``k > 0`` and
    ``e(x, -k) = T(k) e^{-ikx} m_-(x, k)``. Wavenumbers absent from
    ``jost.k_grid`` are integrated on demand. Odd-sector input is extended
    with ``parity``.
    """
    gf = _as_full(g, parity)
    vals = gf.values
    _check_decay(vals)
    x = gf.x
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty(ks.size, dtype=complex)
    extra = [abs(kk) for kk in ks if jost.index(kk) is None]
    other = jost.at(np.array(sorted(set(extra)))) if extra else None
    for i, kk in enumerate(ks):
        if kk == 0:
            raise InvalidInputError("k must be non-zero")
        src = jost if jost.index(kk) is not None else other
        j = src.index(kk)
        ka = abs(kk)
        if kk > 0:
            e = src.T[j] * np.exp(1j * ka * x) * src.m_plus[:, j]
        else:
            e = src.T[j] * np.exp(-1j * ka * x) * src.m_minus[:, j]
        out[i] = trapezoid(np.conj(e) * vals, dx=gf.grid.h) / np.sqrt(2.0 * np.pi)
    return out[0] if np.ndim(k) == 0 else out


def plain_ft(g: GridFunction, k, parity: int = -1):
    """Ordinary transform ``(2 pi)^{-1/2} int conj(e^{ikx}) g(x) dx``."""
    gf = _as_full(g, parity)
    x = gf.x
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.array([trapezoid(np.conj(np.exp(1j * kk * x)) * gf.values, dx=gf.grid.h)
                    for kk in ks]) / np.sqrt(2.0 * np.pi)
    return out[0] if np.ndim(k) == 0 else out


def gauss_legendre_jost(V: GridFunction, omega2: float, kmax: float = 14.0, nodes: int = 160,
                        substeps: int = 2) -> tuple[JostData, np.ndarray]:
    """Jost data at Gauss-Legendre nodes of ``[0, kmax]`` and the matching weights."""
    t, w = leggauss(nodes)
    ks = 0.5 * kmax * (t + 1.0)
    return compute_jost(V, omega2, ks, substeps=substeps), 0.5 * kmax * w


def continuum_mass(g: GridFunction, jost: JostData, weights: np.ndarray, parity: int = -1) -> float:
    """``int (|g^(k)|^2 + |g^(-k)|^2) dk`` as the weighted sum over ``jost.k_grid``.

    Pair with :func:`gauss_legendre_jost` for a Gauss-Legendre rule.
    """
    ks = jost.k_grid
    gp = distorted_ft(g, jost, ks, parity)
    gm = distorted_ft(g, jost, -ks, parity)
    return float(np.sum(weights * (np.abs(gp) ** 2 + np.abs(gm) ** 2)))
