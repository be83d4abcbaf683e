"""Uniform grids on ``[-L, L]`` and sampled functions.

Two sectors are used. ``"full_line"`` works with every node of
``[-L, L]``. ``"odd"`` keeps only the nodes on ``[0, L]`` and imposes
Dirichlet conditions at both ends, which represents odd functions exactly
at ``x = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import InvalidInputError

__all__ = ["FULL", "ODD", "Grid", "GridFunction", "check_sector"]

FULL = "full_line"
ODD = "odd"


def check_sector(sector: str) -> str:
    if sector not in (FULL, ODD):
        raise InvalidInputError(f"sector must be '{FULL}' or '{ODD}', got {sector!r}")
    return sector


@dataclass(frozen=True)
class Grid:
    """Grid with ``n`` equally spaced nodes on ``[-L, L]``.

    ``n`` must be odd so that ``x = 0`` is a node.
    """

    L: float = 30.0
    n: int = 6001

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise InvalidInputError(f"grid half-length must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 5 or self.n % 2 == 0:
            raise InvalidInputError(f"grid point count must be an odd integer >= 5, got {self.n}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    @property
    def mid(self) -> int:
        """Index of ``x = 0`` in the full-line node array."""
        return (self.n - 1) // 2

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @property
    def x_half(self) -> np.ndarray:
        return self.h * np.arange(self.mid + 1)

    def nodes(self, sector: str) -> np.ndarray:
        return self.x if check_sector(sector) == FULL else self.x_half

    def size(self, sector: str) -> int:
        return self.n if check_sector(sector) == FULL else self.mid + 1

    def refined(self) -> "Grid":
        """Same interval with half the spacing."""
        return Grid(self.L, 2 * self.n - 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a real or complex function on the nodes of a sector."""

    grid: Grid
    values: np.ndarray
    sector: str = FULL

    def __post_init__(self):
        check_sector(self.sector)
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size != self.grid.size(self.sector):
            raise InvalidInputError(
                f"expected {self.grid.size(self.sector)} samples for sector {self.sector}, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes(self.sector)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def integral(self, weight=None) -> complex | float:
        """Full-line trapezoid integral of ``values * weight``.

        In the odd sector the integrand is assumed even (a product of two
        odd functions), so the half-line integral is doubled.
        """
        f = self.values if weight is None else self.values * weight
        val = trapezoid(f, dx=self.grid.h)
        return 2.0 * val if self.sector == ODD else val

    def dot(self, other: "GridFunction") -> complex | float:
        """Hermitian inner product ``int conj(self) * other``."""
        return self.with_values(np.conj(self.values)).integral(other.values)

    def norm2(self) -> float:
        return float(np.real(self.integral(np.conj(self.values))))

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, np.asarray(values), self.sector)

    def to_full_line(self, parity: int = -1) -> "GridFunction":
        """Extend an odd-sector function to the full line.

        ``parity=-1`` gives the odd extension, ``+1`` the even one.
        """
        if self.sector == FULL:
            return self
        v = self.values
        left = parity * v[:0:-1]
        return GridFunction(self.grid, np.concatenate([left, v]), FULL)

    def restrict_half(self) -> "GridFunction":
        """Samples on ``[0, L]`` as an odd-sector function."""
        if self.sector == ODD:
            return self
        return GridFunction(self.grid, self.values[self.grid.mid:].copy(), ODD)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, other):
        return self.with_values(self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def conj(self) -> "GridFunction":
        return self.with_values(np.conj(self.values))


def _vals(obj):
    return obj.values if isinstance(obj, GridFunction) else obj
