"""Finite-difference Schrödinger operators ``-d^2/dx^2 + V`` on a sector.

The 3-point Laplacian with Dirichlet ends gives a symmetric tridiagonal
matrix on the interior nodes. Eigenvalues come from LAPACK's bisection
(Sturm counts) with inverse iteration for the vectors. Reported
eigenvalues are Richardson-extrapolated from ``h`` and ``h/2``. The raw
values on the working grid are kept separately for quantities that must
be consistent with the discrete eigenvectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.sparse.linalg import splu

from .errors import InvalidInputError, NearSingularError, NumericalFailure
from .grid import FULL, ODD, Grid, GridFunction, check_sector
from .kink import KinkData

__all__ = [
    "SchrodingerOperator",
    "SpectralData",
    "linearized_operator",
    "sturm_count",
    "eigen_decompose",
    "normalize_internal_mode",
    "resolvent_solve",
    "ground_state",
    "sign_changes",
]


@dataclass(frozen=True, eq=False)
class SchrodingerOperator:
    """``L = -d^2/dx^2 + V`` with Dirichlet conditions at the sector ends.

    Parameters
    ----------
    V : GridFunction
        Real potential on the sector nodes.
    potential : callable, optional
        ``x -> V(x)`` used to resample ``V`` on refined grids; cubic-spline
        interpolation of the samples is used when absent.
    """

    V: GridFunction
    potential: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.V.is_complex:
            raise InvalidInputError("potential must be real")

    @property
    def grid(self) -> Grid:
        return self.V.grid

    @property
    def sector(self) -> str:
        return self.V.sector

    @property
    def omega2(self) -> float:
        """Asymptotic value of ``V``, read off at ``x = L``."""
        return float(self.V.values[-1])

    @property
    def edge_deviation(self) -> float:
        """``|V - omega2|`` at the opposite end (or its max over both ends)."""
        return float(abs(self.V.values[0] - self.V.values[-1]))

    def tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        h = self.grid.h
        v = self.V.values[1:-1]
        d = 2.0 / h**2 + v
        e = np.full(v.size - 1, -1.0 / h**2)
        return d, e

    def apply(self, u: GridFunction) -> GridFunction:
        """``L u`` at interior nodes; boundary entries are set to zero."""
        h = self.grid.h
        v = u.values
        out = np.zeros_like(v, dtype=np.result_type(v, float))
        out[1:-1] = (-v[2:] + 2.0 * v[1:-1] - v[:-2]) / h**2 + self.V.values[1:-1] * v[1:-1]
        return u.with_values(out)

    def in_sector(self, sector: str) -> "SchrodingerOperator":
        """The same operator restricted to another parity sector."""
        check_sector(sector)
        if sector == self.sector:
            return self
        if sector == ODD:
            return SchrodingerOperator(self.V.restrict_half(), self.potential)
        return SchrodingerOperator(self.V.to_full_line(parity=+1), self.potential)

    def refined(self) -> "SchrodingerOperator":
        """Operator on the grid with half the spacing."""
        g2 = self.grid.refined()
        x2 = g2.nodes(self.sector)
        if self.potential is not None:
            v2 = np.asarray(self.potential(x2), dtype=float)
        else:
            full = self.V.to_full_line(parity=+1)
            v2 = CubicSpline(full.x, full.values)(x2)
        return SchrodingerOperator(GridFunction(g2, v2, self.sector), self.potential)


def linearized_operator(kink: KinkData, sector: str = FULL) -> SchrodingerOperator:
    """``L_1 = -d^2/dx^2 + W''(H)`` in the requested sector."""
    op = SchrodingerOperator(kink.V1, kink.profile.potential)
    return op.in_sector(sector)


def sturm_count(d: np.ndarray, e: np.ndarray, x: float) -> int:
    """Number of eigenvalues below ``x`` of the symmetric tridiagonal ``(d, e)``."""
    count = 0
    q = 1.0
    e2 = np.concatenate([[0.0], e**2])
    for di, ei2 in zip(d, e2):
        q = di - x - (ei2 / q if ei2 else 0.0)
        if q == 0.0:
            q = -1e-300
        if q < 0:
            count += 1
    return count


def sign_changes(v: np.ndarray, rel_tol: float = 1e-8) -> int:
    """Sign changes of ``v`` ignoring entries below ``rel_tol * max|v|``."""
    v = np.asarray(v)
    s = np.sign(v[np.abs(v) > rel_tol * np.max(np.abs(v))])
    return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Discrete spectrum of an operator below a cutoff.

    Attributes
    ----------
    eigenvalues : ndarray
        Extrapolated eigenvalues ``lambda_tilde**2`` (increasing).
    discrete_eigenvalues : ndarray
        Raw eigenvalues of the matrix on the working grid.
    eigenfunctions : list of GridFunction
        Unit-L2-norm eigenvectors of the working-grid matrix.
    N_odd : int
        Number of odd-parity eigenvalues in ``(0, omega2)``.
    """

    eigenvalues: np.ndarray
    discrete_eigenvalues: np.ndarray
    eigenfunctions: list
    sector: str
    omega2: float
    N_odd: int
    residuals: np.ndarray
    sign_changes: tuple
    sturm_counts: tuple
    warnings: tuple = ()

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def lambdas(self) -> np.ndarray:
        """Positive frequencies ``sqrt(eigenvalue)`` (NaN for non-positive ones)."""
        ev = np.asarray(self.eigenvalues, dtype=float)
        return np.where(ev > 0, np.sqrt(np.abs(ev)), np.nan)


def _unit(grid: Grid, sector: str, vec: np.ndarray) -> GridFunction:
    full = np.zeros(grid.size(sector))
    full[1:-1] = vec
    gf = GridFunction(grid, full, sector)
    gf = gf.with_values(full / gf.norm())
    return _fix_sign(gf)


def _fix_sign(gf: GridFunction) -> GridFunction:
    v = gf.values
    if gf.sector == ODD:
        ref = v[1]
    else:
        m = gf.grid.mid
        ref = v[m] if abs(v[m]) > 1e-8 * np.max(np.abs(v)) else v[m + 1] - v[m - 1]
    return gf if np.real(ref) >= 0 else gf.with_values(-v)


def _eigs_below(op: SchrodingerOperator, upper: float, vectors: bool):
    d, e = op.tridiagonal()
    lo = float(np.min(d)) - 4.0 / op.grid.h**2 - 1.0
    if vectors:
        return eigh_tridiagonal(d, e, select="v", select_range=(lo, upper))
    return eigh_tridiagonal(d, e, eigvals_only=True, select="v", select_range=(lo, upper)), None


def eigen_decompose(op: SchrodingerOperator, upper: float | None = None, margin: float = 1e-3,
                    refine: bool = True) -> SpectralData:
    """All eigenpairs of ``op`` below ``upper`` (default ``omega2 - margin``).

    Parameters
    ----------
    refine : bool
        Richardson-extrapolate eigenvalues from ``h`` and ``h/2``.
    """
    om2 = op.omega2
    if upper is None:
        upper = om2 - margin
    if upper > om2 - margin:
        raise InvalidInputError(f"upper={upper} exceeds omega2 - margin = {om2 - margin}")
    w, v = _eigs_below(op, upper, vectors=True)
    notes = []
    # boundary ambiguity: a matrix eigenvalue just above the cutoff
    w_near, _ = _eigs_below(op, upper + margin, vectors=False)
    if len(w_near) > len(w) or (len(w) and upper - w[-1] < margin):
        notes.append(f"eigenvalue within {margin:g} of cutoff {upper:g}")
    funcs = [_unit(op.grid, op.sector, v[:, j]) for j in range(len(w))]
    res = []
    for lam, f in zip(w, funcs):
        r = op.apply(f) - f * lam
        res.append(r.norm() / f.norm())
    res = np.array(res)
    if np.any(res > 1e-8):
        raise NumericalFailure(f"eigenpair residual {res.max():.2e} exceeds 1e-8")
    d, e = op.tridiagonal()
    counts = tuple(sturm_count(d, e, lam + 1e-9 * max(1.0, abs(lam))) for lam in w)
    if counts != tuple(range(1, len(w) + 1)):
        raise NumericalFailure(f"Sturm counts {counts} inconsistent with {len(w)} eigenvalues")
    nodes = tuple(sign_changes(f.values[1:-1]) for f in funcs)
    ext = np.array(w, dtype=float)
    if refine and len(w):
        w2, _ = _eigs_below(op.refined(), upper + margin, vectors=False)
        k = min(len(w), len(w2))
        ext[:k] = (4.0 * w2[:k] - w[:k]) / 3.0
    if op.sector == ODD:
        n_odd = int(np.count_nonzero(ext > 0))
    else:
        n_odd = int(sum(1 for lam, f in zip(ext, funcs)
                        if lam > 0 and abs(f.values[op.grid.mid]) < 1e-8 * np.max(np.abs(f.values))))
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return SpectralData(ext, np.array(w, dtype=float), funcs, op.sector, om2, n_odd, res,
                        nodes, counts, tuple(notes))


def normalize_internal_mode(phi: GridFunction, lam: float) -> GridFunction:
    """Rescale to ``||phi||**2 = 1/(2 lam)`` with ``phi'(0) > 0``."""
    if not lam > 0:
        raise InvalidInputError(f"internal-mode frequency must be positive, got {lam}")
    out = phi * (1.0 / (np.sqrt(2.0 * lam) * phi.norm()))
    v = out.values
    if out.sector == ODD:
        slope = v[1] - v[0]
    else:
        m = out.grid.mid
        slope = v[m + 1] - v[m - 1]
    return out if np.real(slope) > 0 else -out


def ground_state(op: SchrodingerOperator, transparent: bool = True, sweeps: int = 3
                 ) -> tuple[float, GridFunction]:
    """Lowest eigenpair of a full-line operator, nodeless and positive.

    With ``transparent`` the Dirichlet rows at both ends are replaced by the
    exact discrete decay ``psi[0] = psi[1]/rho`` of a bound state at the
    current eigenvalue (``rho + 1/rho = 2 + h^2 (V_end - lam)``), iterated a
    few times. This removes the artificial zero at ``x = +-L`` from the
    tails, which matters once ``log psi`` is differentiated.
    """
    if op.sector != FULL:
        raise InvalidInputError("ground_state expects a full-line operator")
    h = op.grid.h
    V = op.V.values
    d, e = op.tridiagonal()
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    lam = float(w[0])
    rho_l = rho_r = np.inf
    if transparent:
        for _ in range(sweeps):
            dd = d.copy()
            rho_l = _decay_ratio(h, V[0], lam)
            rho_r = _decay_ratio(h, V[-1], lam)
            dd[0] = (2.0 - 1.0 / rho_l) / h**2 + V[1]
            dd[-1] = (2.0 - 1.0 / rho_r) / h**2 + V[-2]
            w, v = eigh_tridiagonal(dd, e, select="i", select_range=(0, 0))
            lam = float(w[0])
    psi = np.empty(V.size)
    psi[1:-1] = v[:, 0]
    psi[0] = psi[1] / rho_l
    psi[-1] = psi[-2] / rho_r
    if psi[op.grid.mid] < 0:
        psi = -psi
    gf = GridFunction(op.grid, psi, FULL)
    return lam, gf.with_values(psi / gf.norm())


def _decay_ratio(h: float, v_end: float, lam: float) -> float:
    b = 2.0 + h * h * (v_end - lam)
    if b <= 2.0:
        raise InvalidInputError("ground state is not below the continuum edge")
    return 0.5 * (b + np.sqrt(b * b - 4.0))


def resolvent_solve(op: SchrodingerOperator, mu2: float, f: GridFunction,
                    deflate: tuple[float, GridFunction] | None = None) -> GridFunction:
    """Solve ``(L - mu2) u = f`` with Dirichlet ends.

    Parameters
    ----------
    deflate : (eigenvalue, eigenfunction), optional
        Required when ``mu2`` is within 1e-6 of an eigenvalue. ``f`` is
        projected orthogonally to the eigenfunction and the returned ``u`` is
        orthogonal to it as well (bordered solve).

    Raises
    ------
    NearSingularError
        If ``mu2`` is within 1e-6 of an eigenvalue and no deflation is given.
    """
    om2 = op.omega2
    if not mu2 < om2:
        raise InvalidInputError(f"mu2={mu2} must lie below omega2={om2}")
    if f.sector != op.sector or f.grid != op.grid:
        raise InvalidInputError("right-hand side lives on a different grid or sector")
    d, e = op.tridiagonal()
    rhs = np.array(f.values[1:-1], dtype=np.result_type(f.values, float))
    fnorm = f.norm()
    if fnorm == 0:
        return f.with_values(np.zeros_like(f.values))
    if deflate is None:
        near = eigh_tridiagonal(d, e, eigvals_only=True, select="v",
                                select_range=(mu2 - 1e-6, mu2 + 1e-6))
        if len(near):
            raise NearSingularError(f"mu2={mu2} is within 1e-6 of eigenvalue {near[0]:.12g}")
        ab = np.zeros((3, d.size))
        ab[0, 1:] = e
        ab[1] = d - mu2
        ab[2, :-1] = e
        u_int = solve_banded((1, 1), ab, rhs)
        u = f.with_values(np.concatenate([[0.0], u_int, [0.0]]))
        target = f
    else:
        _, phi = deflate
        phi_u = phi * (1.0 / phi.norm())
        target = f - phi_u * phi_u.dot(f)
        rhs = target.values[1:-1]
        p = phi_u.values[1:-1]
        n = d.size
        T = sp.diags([e, d - mu2, e], [-1, 0, 1], shape=(n, n), format="csc")
        B = sp.bmat([[T, sp.csc_matrix(p[:, None])], [sp.csc_matrix(p[None, :]), None]], format="csc")
        lu = splu(B)
        b = np.concatenate([rhs, [0.0]])
        sol = lu.solve(np.real(b).astype(float))
        if np.iscomplexobj(b):
            sol = sol + 1j * lu.solve(np.imag(b).astype(float))
        u = f.with_values(np.concatenate([[0.0], sol[:-1], [0.0]]))
    r = (op.apply(u) - u * mu2 - target).values
    r[0] = r[-1] = 0.0
    resid = f.with_values(r).norm()
    if resid > 1e-9 * fnorm:
        raise NumericalFailure(f"resolvent residual {resid:.2e} exceeds 1e-9*||f||")
    return u
