"""Multi-index combinatorics of internal-mode frequencies.

A multi-index ``m = (m_plus, m_minus)`` pairs powers of ``z_j`` and of
``conj(z_j)``. Its frequency is ``lambda . m = sum_j lambda_j (m_plus_j -
m_minus_j)``. The sets built here are:

* ``R`` contains the indices with ``|lambda . m| > omega`` (radiating).
* ``R_min`` contains the minimal elements of ``R`` for the order ``n < m``,
  which holds iff ``n_plus_j + n_minus_j <= m_plus_j + m_minus_j`` for all
  ``j`` and ``|n| < |m|``.
* ``I`` contains the indices dominated by some element of ``R_min``.
* ``NR`` contains everything else.
* ``Lambda_j`` and ``Lambda_0`` are the indices of ``NR`` with frequency
  ``lambda_j``, respectively ``0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "MultiIndex",
    "ResonanceStructure",
    "GenericityReport",
    "compute_M",
    "enumerate_indices",
    "enumerate_sets",
    "check_genericity",
    "format_sets",
]

FREQ_TOL = 1e-9
NEAR_BAND = 1e-6
LAMBDA_TOL = 1e-12


@dataclass(frozen=True, order=False)
class MultiIndex:
    """Pair of ``N``-tuples of non-negative integers."""

    plus: tuple[int, ...]
    minus: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(v) for v in self.plus)
        m = tuple(int(v) for v in self.minus)
        if len(p) != len(m):
            raise InvalidInputError("plus and minus parts must have equal length")
        if any(v < 0 for v in p + m):
            raise InvalidInputError("multi-index entries must be non-negative")
        object.__setattr__(self, "plus", p)
        object.__setattr__(self, "minus", m)

    @classmethod
    def zero(cls, N: int) -> "MultiIndex":
        return cls((0,) * N, (0,) * N)

    @classmethod
    def unit(cls, j: int, N: int, conj: bool = False) -> "MultiIndex":
        """``e^j`` (or its conjugate) with ``j`` counted from 0."""
        e = tuple(1 if i == j else 0 for i in range(N))
        return cls((0,) * N, e) if conj else cls(e, (0,) * N)

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        """Inverse of ``str``: ``"(2,0)"`` or ``"((2,0),(0,1))"``."""
        t = text.replace(" ", "")
        if t.startswith("((") and t.endswith("))"):
            pairs = [tuple(int(v) for v in p.split(",")) for p in t[2:-2].split("),(")]
            return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))
        a, b = t.strip("()").split(",")
        return cls((int(a),), (int(b),))

    @property
    def N(self) -> int:
        return len(self.plus)

    @property
    def order(self) -> int:
        return sum(self.plus) + sum(self.minus)

    def __len__(self):
        return self.order

    @property
    def conj(self) -> "MultiIndex":
        return MultiIndex(self.minus, self.plus)

    @property
    def is_balanced(self) -> bool:
        return self.plus == self.minus

    def dot(self, lambdas: Sequence[float]) -> float:
        return float(sum(l * (p - m) for l, p, m in zip(lambdas, self.plus, self.minus)))

    def totals(self) -> tuple[int, ...]:
        return tuple(p + m for p, m in zip(self.plus, self.minus))

    def precedes(self, other: "MultiIndex") -> bool:
        """``self < other`` in the domination order."""
        return (self.order < other.order
                and all(a <= b for a, b in zip(self.totals(), other.totals())))

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a + b for a, b in zip(self.plus, other.plus)),
                          tuple(a + b for a, b in zip(self.minus, other.minus)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a - b for a, b in zip(self.plus, other.plus)),
                          tuple(a - b for a, b in zip(self.minus, other.minus)))

    def contains(self, other: "MultiIndex") -> bool:
        """Componentwise ``other <= self``."""
        return (all(b <= a for a, b in zip(self.plus, other.plus))
                and all(b <= a for a, b in zip(self.minus, other.minus)))

    def monomial(self, z: np.ndarray) -> complex:
        """``z^m = prod z_j^{m_plus_j} conj(z_j)^{m_minus_j}``."""
        z = np.asarray(z, dtype=complex)
        return complex(np.prod(z ** np.array(self.plus)) * np.prod(np.conj(z) ** np.array(self.minus)))

    def sort_key(self):
        return (self.order, self.plus, self.minus)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.N == 1:
            return f"({self.plus[0]},{self.minus[0]})"
        return "(" + ",".join(f"({p},{m})" for p, m in zip(self.plus, self.minus)) + ")"

    __repr__ = __str__


def enumerate_indices(N: int, max_order: int) -> list[MultiIndex]:
    """All multi-indices with ``|m| <= max_order``, sorted by ``(|m|, plus, minus)``."""
    out = []
    for order in range(max_order + 1):
        for comp in _compositions(order, 2 * N):
            out.append(MultiIndex(comp[:N], comp[N:]))
    return sorted(out, key=MultiIndex.sort_key)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def compute_M(lambda1: float, omega: float) -> int:
    """Largest integer ``M`` with ``(M - 1) lambda1 < omega``."""
    if not (0.0 < lambda1 < omega):
        raise InvalidInputError(f"need 0 < lambda1 < omega, got lambda1={lambda1}, omega={omega}")
    M = 1
    while M * lambda1 < omega:
        M += 1
    return M


@dataclass(frozen=True, eq=False)
class ResonanceStructure:
    """Classified multi-indices up to ``|m| <= 2M``."""

    lambdas: tuple[float, ...]
    omega: float
    M: int
    R_min: tuple[MultiIndex, ...]
    NR: tuple[MultiIndex, ...]
    I_truncated: tuple[MultiIndex, ...]
    Lambda: tuple[tuple[MultiIndex, ...], ...]
    Lambda_0: tuple[MultiIndex, ...]
    near_resonances: tuple[tuple[MultiIndex, float], ...] = field(default=())

    @property
    def N(self) -> int:
        return len(self.lambdas)

    def classify(self, m: MultiIndex) -> str:
        if m in self.R_min:
            return "R_min"
        if m in self.NR:
            return "NR"
        if m in self.I_truncated or m.order > self.M:
            return "I"
        raise KeyError(str(m))

    def lambda_index(self, m: MultiIndex) -> int | None:
        """``j`` with ``m`` in ``Lambda_j``; ``None`` otherwise."""
        for j, s in enumerate(self.Lambda):
            if m in s:
                return j
        return None


def enumerate_sets(lambdas: Sequence[float], omega: float, tol: float = FREQ_TOL) -> ResonanceStructure:
    """Classify all multi-indices with ``|m| <= 2M``.

    ``M`` comes from the smallest frequency. Membership in ``R`` uses
    ``|lambda . m| > omega + tol``. Frequencies within ``1e-6`` of
    ``omega`` are recorded as near resonances.
    """
    lam = tuple(float(v) for v in lambdas)
    N = len(lam)
    if N == 0:
        raise InvalidInputError("at least one internal-mode frequency is required")
    if any(not (0 < v < omega) for v in lam):
        raise InvalidInputError("frequencies must lie in (0, omega)")
    M = compute_M(min(lam), omega)
    rmin, nr, inter, near = [], [], [], []
    for m in enumerate_indices(N, 2 * M):
        f = abs(m.dot(lam))
        if abs(f - omega) <= NEAR_BAND:
            near.append((m, f - omega))
        if any(n.precedes(m) for n in rmin):
            inter.append(m)
        elif f > omega + tol:
            rmin.append(m)
        else:
            nr.append(m)
    lam_sets = tuple(tuple(m for m in nr if abs(m.dot(lam) - lj) <= LAMBDA_TOL * max(1.0, lj))
                     for lj in lam)
    lam0 = tuple(m for m in nr if abs(m.dot(lam)) <= LAMBDA_TOL)
    return ResonanceStructure(lam, float(omega), M, tuple(rmin), tuple(nr), tuple(inter),
                              lam_sets, lam0, tuple(near))


@dataclass(frozen=True)
class GenericityReport:
    """Violations of the two genericity conditions.

    ``resonant_frequency`` lists indices with ``|lambda . m| = omega`` and
    ``|m| <= M``. ``unbalanced_zero`` lists indices with ``lambda . m = 0``
    but ``m_plus != m_minus`` and ``|m| <= 2M``.
    """

    resonant_frequency: tuple[MultiIndex, ...]
    unbalanced_zero: tuple[MultiIndex, ...]
    near_resonances: tuple[tuple[MultiIndex, float], ...]

    @property
    def passed(self) -> bool:
        return not self.resonant_frequency and not self.unbalanced_zero


def check_genericity(structure: ResonanceStructure, tol: float = FREQ_TOL) -> GenericityReport:
    lam, om, M = structure.lambdas, structure.omega, structure.M
    bad1, bad2 = [], []
    for m in enumerate_indices(structure.N, 2 * M):
        f = m.dot(lam)
        if m.order <= M and abs(abs(f) - om) <= tol:
            bad1.append(m)
        if abs(f) <= tol and not m.is_balanced:
            bad2.append(m)
    near = tuple((m, d) for m, d in structure.near_resonances if m.order <= M)
    return GenericityReport(tuple(bad1), tuple(bad2), near)


def format_sets(structure: ResonanceStructure) -> str:
    """Stable text rendering, one set per line."""
    def fmt(ms: Iterable[MultiIndex]) -> str:
        return "{" + ", ".join(str(m) for m in sorted(ms, key=MultiIndex.sort_key)) + "}"

    lines = [
        "lambdas = " + ", ".join(f"{v:.17g}" for v in structure.lambdas),
        f"omega = {structure.omega:.17g}",
        f"M = {structure.M}",
        "R_min = " + fmt(structure.R_min),
        "NR = " + fmt(structure.NR),
        "I_truncated = " + fmt(structure.I_truncated),
    ]
    for j, s in enumerate(structure.Lambda, start=1):
        lines.append(f"Lambda_{j} = " + fmt(s))
    lines.append("Lambda_0 = " + fmt(structure.Lambda_0))
    return "\n".join(lines)
