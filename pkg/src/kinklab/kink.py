"""Static kink ``H'' = W'(H)`` by quadrature inversion.

The kink is the monotone solution of ``H' = sqrt(2 W(H))`` with ``H(0) = 0``.
Writing ``s = zeta - H`` for the distance to the vacuum and
``W(zeta - s) = s**2 Q(s)``, the first integral becomes

    x(s) = int_s^zeta g(r) dr + log(zeta / s) / omega,

where ``g`` is smooth on ``[0, zeta]``. The logarithm carries the entire
singularity at the vacuum, so ``g`` is represented by piecewise Chebyshev
interpolants that are integrated exactly. ``x -> s`` is then inverted by
Newton's method in ``t = log s``. This keeps full relative precision in
``s`` even where ``H`` is within rounding of ``zeta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial import polynomial as P

from .errors import InvalidInputError, NumericalFailure
from .grid import FULL, ODD, Grid, GridFunction
from .model import PotentialModel, make_phi_family, validate

__all__ = [
    "KinkProfile",
    "KinkData",
    "kink_profile",
    "compute_kink",
    "kink_epsilon_derivative",
    "rk4_kink",
    "decay_rate_fit",
]

_CHEB_DEGREES = (16, 32, 64, 128)
_MAX_PANELS = 256


def _adaptive_chebyshev(f, a: float, b: float) -> list:
    """Piecewise Chebyshev antiderivatives of ``f`` on ``[a, b]``.

    A panel is accepted once the trailing coefficients drop below 1e-14
    relative; otherwise it is bisected. Each entry is ``(lo, hi, F)`` with
    ``F`` the antiderivative vanishing at ``lo``.
    """
    todo = [(a, b)]
    done = []
    while todo:
        lo, hi = todo.pop()
        for deg in _CHEB_DEGREES:
            cheb = Chebyshev.interpolate(f, deg, domain=[lo, hi])
            tail = np.max(np.abs(cheb.coef[-4:]))
            if tail <= 1e-14 * max(1.0, np.max(np.abs(cheb.coef))):
                done.append((lo, hi, cheb.integ(lbnd=lo)))
                break
        else:
            mid = 0.5 * (lo + hi)
            todo.extend([(mid, hi), (lo, mid)])
        if len(done) + len(todo) > _MAX_PANELS:
            raise NumericalFailure(
                f"kink quadrature did not converge: Chebyshev tail {tail:.2e} on [{lo:.3g}, {hi:.3g}]")
    done.sort(key=lambda p: p[0])
    return done


class KinkProfile:
    """Continuous representation of the kink of ``model``.

    Evaluates ``H``, ``H'`` and ``H''/H'`` at arbitrary points. Instances are
    immutable after construction and cached per model by
    :func:`kink_profile`.
    """

    def __init__(self, model: PotentialModel):
        self.model = model
        self.zeta = float(model.zeta)
        self.omega = model.omega
        self._q = model.vacuum_factor
        self._dq = P.polyder(self._q) if self._q.size > 1 else np.zeros(1)
        q1 = self._q[1:] if self._q.size > 1 else np.zeros(1)
        om = self.omega

        def smooth_part(s):
            r = np.sqrt(2.0 * P.polyval(s, self._q))
            return -2.0 * P.polyval(s, q1) / (om * r * (om + r))

        self._panels = _adaptive_chebyshev(smooth_part, 0.0, self.zeta)
        self.cheb_degree = max(len(c.coef) - 1 for _, _, c in self._panels)
        # cumulative integral of the smooth part up to each panel start
        self._breaks = np.array([a for a, _, _ in self._panels] + [self.zeta])
        offs = [0.0]
        for a, b, c in self._panels:
            offs.append(offs[-1] + float(c(b)))
        self._offsets = np.array(offs)
        self._total = float(self._offsets[-1])

    def _anti(self, s):
        """``int_0^s`` of the smooth part of the integrand."""
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self._breaks, s, side="right") - 1, 0, len(self._panels) - 1)
        out = np.empty(s.shape)
        for i in np.unique(idx):
            m = idx == i
            out[m] = self._offsets[i] + self._panels[i][2](s[m])
        return out

    def _Q(self, s):
        return P.polyval(s, self._q)

    def position(self, s):
        """``x`` as a function of the distance ``s`` to the vacuum."""
        s = np.asarray(s, dtype=float)
        return self._total - self._anti(s) + np.log(self.zeta / s) / self.omega

    def distance(self, x, tol: float = 1e-14, maxiter: int = 100) -> np.ndarray:
        """Distance ``zeta - H(|x|)`` to the vacuum, to full relative precision."""
        xa = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
        logz = np.log(self.zeta)
        t = logz - self.omega * xa
        for _ in range(maxiter):
            s = np.exp(t)
            f = self._total - self._anti(s) + (logz - t) / self.omega - xa
            fp = -1.0 / np.sqrt(2.0 * self._Q(s))
            dt = -f / fp
            t = np.minimum(t + dt, logz)
            if np.all(np.abs(dt) <= tol * (1.0 + np.abs(t))):
                break
        s = np.exp(t)
        resid = np.abs(self.position(s) - xa)
        bad = resid > 1e-10 * np.maximum(1.0, xa)
        if np.any(bad):
            raise NumericalFailure(
                f"kink inversion residual {resid.max():.2e} exceeds 1e-10 at x={xa[np.argmax(resid)]:.6g}")
        return s

    def H(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * (self.zeta - self.distance(x).reshape(x.shape))

    def Hprime(self, x):
        x = np.asarray(x, dtype=float)
        s = self.distance(x)
        return (s * np.sqrt(2.0 * self._Q(s))).reshape(x.shape)

    def log_derivative(self, x):
        """``H''/H'``, evaluated without differentiating samples."""
        x = np.asarray(x, dtype=float)
        s = self.distance(x)
        q = self._Q(s)
        w = -(2.0 * q + s * P.polyval(s, self._dq)) / np.sqrt(2.0 * q)
        return np.sign(x) * w.reshape(x.shape)

    def potential(self, x):
        """Linearized potential ``W''(H(x))``."""
        return self.model.dW(self.H(x), 2)


@lru_cache(maxsize=64)
def kink_profile(model: PotentialModel) -> KinkProfile:
    return KinkProfile(model)


@dataclass(frozen=True, eq=False)
class KinkData:
    """Kink sampled on a full-line grid.

    Attributes
    ----------
    H, Hprime : GridFunction
        Kink and its derivative on all nodes.
    log_derivative : GridFunction
        ``H''/H'`` on all nodes (zero at ``x = 0``).
    distance : ndarray
        ``zeta - H`` on the half-line nodes, to full relative precision.
    """

    grid: Grid
    model: PotentialModel
    H: GridFunction
    Hprime: GridFunction
    log_derivative: GridFunction
    distance: np.ndarray
    zeta: float
    omega: float
    profile: KinkProfile

    @property
    def V1(self) -> GridFunction:
        """``W''(H)`` on the full line."""
        return self.H.with_values(self.model.dW(self.H.values, 2))


def compute_kink(model: PotentialModel, grid: Grid | None = None) -> KinkData:
    """Sample the kink of ``model`` on ``grid``.

    Raises
    ------
    InvalidInputError
        If the model fails validation or ``grid.L < 10/omega``.
    NumericalFailure
        If the quadrature or the inversion misses its tolerance.
    """
    grid = grid or Grid()
    report = validate(model)
    if not report.ok:
        raise InvalidInputError(f"model fails validation: {', '.join(report.failed())}")
    if grid.L < 10.0 / model.omega:
        raise InvalidInputError(f"grid.L={grid.L} is below 10/omega={10.0 / model.omega:.4g}")
    prof = kink_profile(model)
    xh = grid.x_half
    s = prof.distance(xh)
    Hh = prof.zeta - s
    Hh[0] = 0.0
    q = prof._Q(s)
    Hp = s * np.sqrt(2.0 * q)
    w = -(2.0 * q + s * P.polyval(s, prof._dq)) / np.sqrt(2.0 * q)
    w[0] = 0.0
    H = np.concatenate([-Hh[:0:-1], Hh])
    Hpf = np.concatenate([Hp[:0:-1], Hp])
    wf = np.concatenate([-w[:0:-1], w])
    return KinkData(
        grid=grid,
        model=model,
        H=GridFunction(grid, H, FULL),
        Hprime=GridFunction(grid, Hpf, FULL),
        log_derivative=GridFunction(grid, wf, FULL),
        distance=s,
        zeta=prof.zeta,
        omega=prof.omega,
        profile=prof,
    )


def kink_epsilon_derivative(eps: float, grid: Grid | None = None, step: float = 1e-3) -> GridFunction:
    """``d H_eps / d eps`` for the product family by finite differences.

    Central differences are used when ``eps >= step``; closer to the end of
    the family a second-order one-sided stencil is used instead.
    """
    grid = grid or Grid()
    if eps < 0 or step <= 0:
        raise InvalidInputError("need eps >= 0 and step > 0")
    if eps >= step:
        if eps + step >= 1:
            raise InvalidInputError("eps + step must stay below 1")
        hp = compute_kink(make_phi_family(eps + step), grid).H.values
        hm = compute_kink(make_phi_family(eps - step), grid).H.values
        vals = (hp - hm) / (2.0 * step)
    else:
        if eps + 2 * step >= 1:
            raise InvalidInputError("eps + 2*step must stay below 1")
        h0, h1, h2 = (compute_kink(make_phi_family(eps + k * step), grid).H.values for k in range(3))
        vals = (-3.0 * h0 + 4.0 * h1 - h2) / (2.0 * step)
    return GridFunction(grid, vals, FULL)


def rk4_kink(model: PotentialModel, grid: Grid, x_max: float | None = None,
             substeps: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Integrate ``H'' = W'(H)`` from ``(0, sqrt(2 W(0)))`` by classical RK4.

    The vacuum is a saddle, so integration errors grow like
    ``exp(omega x)``; ``substeps`` RK4 steps per grid cell keep the result
    usable out to ``x_max`` (default ``L/2``).

    Returns
    -------
    x, H : ndarray
        Half-line nodes up to ``x_max`` and the integrated kink there.
    """
    x_max = grid.L / 2 if x_max is None else x_max
    nsteps = int(round(x_max / grid.h))
    dt = grid.h / substeps
    y = np.array([0.0, np.sqrt(2.0 * model.W(0.0))])
    c1 = model.poly(1)

    def f(v):
        return np.array([v[1], P.polyval(v[0], c1)])

    out = np.empty(nsteps + 1)
    out[0] = 0.0
    for i in range(nsteps):
        for _ in range(substeps):
            k1 = f(y)
            k2 = f(y + 0.5 * dt * k1)
            k3 = f(y + 0.5 * dt * k2)
            k4 = f(y + dt * k3)
            y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y[0]
    return grid.h * np.arange(nsteps + 1), out


def decay_rate_fit(kink: KinkData) -> float:
    """Exponential rate of ``zeta - H`` from a log-linear fit on the last quarter."""
    x = kink.grid.x_half
    m = x >= 0.75 * kink.grid.L
    slope = np.polyfit(x[m], np.log(kink.distance[m]), 1)[0]
    return float(-slope)
