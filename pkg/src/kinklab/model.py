"""Even polynomial potentials ``W`` with exact derivatives.

A model is stored as its ascending monomial coefficients. Derivatives are
obtained by coefficient shifts, so nothing downstream ever differentiates
``W`` numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import CapabilityError, InvalidInputError

__all__ = [
    "PotentialModel",
    "CheckResult",
    "ValidationReport",
    "make_phi4",
    "make_phi_family",
    "from_even_coeffs",
    "locate_vacuum",
    "derivative",
    "validate",
]

_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class PotentialModel:
    """Polynomial potential ``W(u) = sum_k coeffs[k] u**k``.

    Parameters
    ----------
    coeffs : tuple of float
        Ascending monomial coefficients. Odd entries should vanish for an
        admissible model; :func:`validate` reports them otherwise.
    zeta : float
        Vacuum, the smallest positive double zero of ``W``.
    max_order : int, optional
        Highest derivative order served by :func:`derivative`. Defaults to
        the polynomial degree.
    label : str
        Free-form provenance tag (e.g. ``"phi8(eps=0.1)"``).
    """

    coeffs: tuple[float, ...]
    zeta: float
    max_order: int = -1
    label: str = field(default="poly", compare=False)

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if len(c) == 0 or not np.all(np.isfinite(c)):
            raise InvalidInputError("coefficients must be a non-empty list of finite reals")
        # trim trailing zeros so that degree is meaningful
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)
        if not np.isfinite(self.zeta) or self.zeta <= 0:
            raise InvalidInputError(f"zeta must be positive, got {self.zeta}")
        if self.max_order < 0:
            object.__setattr__(self, "max_order", self.degree)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @cached_property
    def _derivs(self) -> list[np.ndarray]:
        out = [np.asarray(self.coeffs)]
        for _ in range(self.degree):
            out.append(P.polyder(out[-1]))
        return out

    def poly(self, order: int = 0) -> np.ndarray:
        """Coefficient array of ``W^(order)``; zero beyond the degree."""
        if order < 0:
            raise InvalidInputError("derivative order must be non-negative")
        if order > self.degree:
            return np.zeros(1)
        return self._derivs[order]

    def W(self, u):
        return P.polyval(u, self.poly(0))

    def dW(self, u, order: int = 1):
        return P.polyval(u, self.poly(order))

    @property
    def omega2(self) -> float:
        """Squared mass ``W''(zeta)``."""
        return float(P.polyval(self.zeta, self.poly(2)))

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.omega2))

    @cached_property
    def vacuum_factor(self) -> np.ndarray:
        """Coefficients of ``Q`` with ``W(zeta - s) = s**2 Q(s)``.

        The two lowest coefficients of the shifted polynomial are ``W(zeta)``
        and ``-W'(zeta)``; they are dropped (they vanish for an admissible
        model), so ``Q(0) = omega2 / 2``.
        """
        shifted = _compose_shift(np.asarray(self.coeffs), self.zeta)
        q = shifted[2:].copy()
        if q.size == 0:
            q = np.zeros(1)
        return q


def _compose_shift(c: np.ndarray, zeta: float) -> np.ndarray:
    """Coefficients in ``s`` of ``p(zeta - s)``."""
    out = np.zeros(1)
    lin = np.array([zeta, -1.0])
    power = np.ones(1)
    for k, ck in enumerate(c):
        if k > 0:
            power = P.polymul(power, lin)
        out = P.polyadd(out, ck * power)
    return out


def from_even_coeffs(even: "list[float] | tuple[float, ...]", zeta: float | None = None,
                     label: str = "poly") -> PotentialModel:
    """Build a model from coefficients of ``u**0, u**2, u**4, ...``.

    If ``zeta`` is omitted it is located with :func:`locate_vacuum`.
    """
    even = [float(v) for v in even]
    if len(even) < 2:
        raise InvalidInputError("need at least the u^0 and u^2 coefficients")
    full = np.zeros(2 * len(even) - 1)
    full[::2] = even
    if zeta is None:
        zeta = locate_vacuum(full)
    return PotentialModel(tuple(full), float(zeta), label=label)


def locate_vacuum(coeffs, tol: float = 1e-14) -> float:
    """Smallest positive double zero of the polynomial ``coeffs``.

    Candidates are the positive real critical points; the first one where
    ``W`` vanishes is refined by Newton steps on ``W'`` followed by a
    bisection on a sign-changing bracket.
    """
    c = np.asarray(coeffs, dtype=float)
    dc = P.polyder(c)
    roots = P.polyroots(dc) if dc.size > 1 else np.array([])
    cands = sorted(r.real for r in roots if abs(r.imag) < 1e-8 and r.real > 1e-12)
    scale = max(1.0, float(np.max(np.abs(c))))
    for r in cands:
        for _ in range(4):
            d2 = P.polyval(r, P.polyder(dc))
            if d2 == 0:
                break
            r = r - P.polyval(r, dc) / d2
        if abs(P.polyval(r, c)) > 1e-9 * scale:
            continue
        delta = 1e-8 * max(1.0, r)
        a, b = r - delta, r + delta
        fa, fb = P.polyval(a, dc), P.polyval(b, dc)
        if fa * fb < 0:
            while b - a > tol * max(1.0, r):
                mid = 0.5 * (a + b)
                fm = P.polyval(mid, dc)
                if fa * fm <= 0:
                    b = mid
                else:
                    a, fa = mid, fm
            r = 0.5 * (a + b)
        return float(r)
    raise InvalidInputError("polynomial has no positive double zero")


def make_phi_family(epsilon: float) -> PotentialModel:
    """Product potential ``(1+eps)^2 (u^2-1)^2 (eps u^2-1)^2 / 4``.

    ``epsilon = 0`` is the quartic double well; small ``epsilon`` deforms it
    into an octic with extra zeros at ``+-1/sqrt(eps)``.
    """
    eps = float(epsilon)
    if not (0.0 <= eps < 1.0):
        raise InvalidInputError(f"epsilon must lie in [0, 1), got {epsilon}")
    a = np.array([-1.0, 0.0, 1.0])          # u^2 - 1
    b = np.array([-1.0, 0.0, eps])          # eps u^2 - 1
    c = 0.25 * (1.0 + eps) ** 2 * P.polymul(P.polymul(a, a), P.polymul(b, b))
    return PotentialModel(tuple(c), 1.0, label=f"phi48(eps={eps:g})")


def make_phi4() -> PotentialModel:
    """The quartic double well ``(u^2-1)^2/4``."""
    return make_phi_family(0.0)


def derivative(model: PotentialModel, order: int, u):
    """Exact ``W^(order)(u)``.

    Raises
    ------
    CapabilityError
        If ``order`` exceeds ``model.max_order``.
    """
    if order < 0:
        raise InvalidInputError("derivative order must be non-negative")
    if order > model.max_order:
        raise CapabilityError(f"order {order} exceeds max_order {model.max_order}")
    return model.dW(u, order)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_value: float
    worst_at: float


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}: worst={c.worst_value:.3e} at u={c.worst_at:.6g}"
                 for c in self.checks]
        return "\n".join(lines)


def validate(model: PotentialModel, samples: int = 2001) -> ValidationReport:
    """Check the structural hypotheses on ``W``; failures are reported."""
    z = model.zeta
    w0 = float(model.W(z))
    w1 = float(model.dW(z, 1))
    checks = [
        CheckResult("W(zeta)=0", abs(w0) <= _ZERO_TOL, abs(w0), z),
        CheckResult("W'(zeta)=0", abs(w1) <= _ZERO_TOL, abs(w1), z),
        CheckResult("omega2>0", model.omega2 > 0, model.omega2, z),
    ]
    u = np.linspace(-z, z, samples)[1:-1]
    wu = model.W(u)
    i = int(np.argmin(wu))
    checks.append(CheckResult("W>0 on (-zeta,zeta)", bool(wu[i] > 0), float(wu[i]), float(u[i])))
    us = np.linspace(0.0, 2.0 * z, samples)
    asym = np.abs(model.W(us) - model.W(-us))
    j = int(np.argmax(asym))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(model.W(us)))))
    checks.append(CheckResult("W even", bool(asym[j] <= tol), float(asym[j]), float(us[j])))
    return ValidationReport(tuple(checks))
