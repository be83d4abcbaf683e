"""Refined profile, resonant sources and Fermi Golden Rule coefficients.

Fields are pairs ``u = (u1, u2)`` on the odd sector. The linearization at
the kink is ``L1 u = (u2, -L_1 u1)`` and ``J u = (u2, -u1)``. Two pairings
are used: the bilinear ``(f, g) = int f1 g1 + f2 g2`` and the real inner
product ``<f, g> = Re (f, conj g)``. The discrete modes are
``Phi_j = (phi_j, -i lam_j phi_j)`` with ``||phi_j||^2 = 1/(2 lam_j)``, so
``(J Phi_j, conj Phi_j) = -i``.

The profile ``phi[z] = (H, 0) + sum_{m in NR} z^m phi_m`` is built order
by order from

    (L1 + i lam.m) phi_m = E_m = g_m - sum i (lam_n . m') phi_m',

where ``g_m = (0, [z^m] sum_l W^(1+l)(H)/l! phi1[z]^l)`` and the sum runs
over ``m' + n = m`` with ``n`` a non-zero element of ``Lambda_0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import (DegenerateFrameError, DependencyError, GenericityViolation,
                     InternalConsistencyError, InvalidInputError, NearSingularError)
from .grid import ODD, GridFunction
from .kink import KinkData
from .model import PotentialModel
from .operator import (SchrodingerOperator, SpectralData, linearized_operator,
                       normalize_internal_mode, resolvent_solve)
from .resonance import MultiIndex, ResonanceStructure
from .scattering import JostData, distorted_ft

__all__ = [
    "RefinedProfile",
    "FgrEntry",
    "FgrReport",
    "build_refined_profile",
    "compute_rmin_sources",
    "fgr_coefficient",
    "profile_orthogonality_check",
    "discrete_projection",
]


def _bilinear(f, g, h: float) -> complex:
    """Full-line ``int f1 g1 + f2 g2`` for odd-sector pairs (trapezoid)."""
    s = 0j
    for a, b in zip(f, g):
        p = a * b
        s += h * (np.sum(p) - 0.5 * (p[0] + p[-1]))
    return 2.0 * s


def _J(u):
    return (u[1], -u[0])


def _real_pair(f, g, h: float) -> float:
    return float(np.real(_bilinear(f, (np.conj(g[0]), np.conj(g[1])), h)))


@dataclass(eq=False)
class RefinedProfile:
    """Coefficient functions of the refined profile.

    Attributes
    ----------
    phi : dict
        ``MultiIndex -> (phi_m1, phi_m2)`` complex arrays on the odd sector.
    lambda_jm : dict
        ``(j, m) -> real`` frequency corrections for ``m`` in ``Lambda_j``
        (``j`` counted from 0). The base entries ``(j, e^j)`` hold ``lam_j``.
    lambda_conj : dict
        Same corrections recomputed from the conjugate index.
    sources : dict
        ``MultiIndex -> E_m`` for every constructed index.
    residuals : dict
        Relative residual of the defining equation per constructed index.
    """

    model: PotentialModel
    op: SchrodingerOperator
    structure: ResonanceStructure
    H: np.ndarray
    lambdas: np.ndarray
    modes: list
    phi: dict = field(default_factory=dict)
    lambda_jm: dict = field(default_factory=dict)
    lambda_conj: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    scalar_residuals: dict = field(default_factory=dict)
    order: int = 1

    @property
    def N(self) -> int:
        return len(self.lambdas)

    @property
    def h(self) -> float:
        return self.op.grid.h

    @property
    def grid(self):
        return self.op.grid

    def Phi(self, j: int, conj: bool = False):
        p = self.modes[j]
        lam = self.lambdas[j]
        if conj:
            return (p.astype(complex), 1j * lam * p)
        return (p.astype(complex), -1j * lam * p)

    def lambda_vector(self, n: MultiIndex) -> np.ndarray:
        """``(lam_{1n}, ..., lam_{Nn})`` for ``n`` in ``Lambda_0``; zeros if unset."""
        out = np.zeros(self.N)
        for j in range(self.N):
            out[j] = self.lambda_jm.get((j, MultiIndex.unit(j, self.N) + n), 0.0)
        return out

    def apply_L1(self, u):
        """``(L1 + 0) u`` at interior nodes."""
        Lu = self.op.apply(GridFunction(self.grid, u[0], ODD)).values
        return (u[1].copy(), -Lu)

    def vector_residual(self, m: MultiIndex) -> float:
        """``||(L1 + i lam.m) phi_m - E_m|| / ||E_m||`` on interior nodes."""
        u = self.phi[m]
        E = self.sources[m]
        mu = m.dot(self.lambdas)
        Lu = self.apply_L1(u)
        r = [Lu[c] + 1j * mu * u[c] - E[c] for c in range(2)]
        for c in range(2):
            r[c][0] = r[c][-1] = 0.0
        En = [E[c].copy() for c in range(2)]
        for c in range(2):
            En[c][0] = En[c][-1] = 0.0
        num = np.sqrt(abs(_bilinear(r, (np.conj(r[0]), np.conj(r[1])), self.h)))
        den = np.sqrt(abs(_bilinear(En, (np.conj(En[0]), np.conj(En[1])), self.h)))
        return float(num / den) if den > 0 else float(num)

    def field(self, z) -> tuple[np.ndarray, np.ndarray]:
        """``phi[z]`` on the odd sector."""
        z = np.asarray(z, dtype=complex)
        u1 = self.H.astype(complex)
        u2 = np.zeros_like(u1)
        for m, (a, b) in self.phi.items():
            if m.order == 0:
                continue
            c = m.monomial(z)
            u1 = u1 + c * a
            u2 = u2 + c * b
        return u1, u2

    def dz_field(self, z, w) -> tuple[np.ndarray, np.ndarray]:
        """Directional derivative ``D_z phi[z] w`` for complex direction ``w``."""
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        N = self.N
        d1 = np.zeros(self.H.size, dtype=complex)
        d2 = np.zeros_like(d1)
        for m, (a, b) in self.phi.items():
            coef = 0j
            for j in range(N):
                if m.plus[j]:
                    coef += m.plus[j] * (m - MultiIndex.unit(j, N)).monomial(z) * w[j]
                if m.minus[j]:
                    coef += m.minus[j] * (m - MultiIndex.unit(j, N, conj=True)).monomial(z) * np.conj(w[j])
            if coef != 0:
                d1 = d1 + coef * a
                d2 = d2 + coef * b
        return d1, d2

    def residual(self, z) -> tuple[np.ndarray, np.ndarray]:
        """``F(phi[z]) - D_z phi[z] ztilde - F(phi[0])``.

        ``F(u) = (u2, u1'' - W'(u1))`` uses the same three-point stencil as
        ``L_1``; subtracting the static residual removes the discretization
        error of the kink itself.
        """
        z = np.asarray(z, dtype=complex).reshape(-1)
        F = _field_residual(self, self.field(z))
        F0 = _field_residual(self, self.field(np.zeros(self.N)))
        dz = self.dz_field(z, self.ztilde(z))
        return (F[0] - F0[0] - dz[0], F[1] - F0[1] - dz[1])

    def ztilde(self, z) -> np.ndarray:
        """``-i sum_{m in Lambda_j} lam_{jm} z^m`` per mode."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(self.N, dtype=complex)
        for (j, m), lam in self.lambda_jm.items():
            out[j] += -1j * lam * m.monomial(z)
        return out


def _series_coefficient(phi: dict, target: MultiIndex, ell: int) -> np.ndarray:
    """``[z^target] (sum_{|m|>=1} z^m phi_m1)^ell``."""
    items = [(m, v[0]) for m, v in phi.items() if m.order >= 1 and target.contains(m)]
    # dynamic programming over powers, tracking only sub-indices of target
    current = {MultiIndex.zero(target.N): None}
    for _ in range(ell):
        nxt = {}
        for m0, f0 in current.items():
            for m1, f1 in items:
                s = m0 + m1
                if not target.contains(s):
                    continue
                prod = f1 if f0 is None else f0 * f1
                nxt[s] = prod if s not in nxt else nxt[s] + prod
        current = nxt
    val = current.get(target)
    return np.zeros(items[0][1].shape, dtype=complex) if val is None else val


def _g_source(prof: RefinedProfile, m: MultiIndex) -> tuple[np.ndarray, np.ndarray]:
    """``g_m = (0, sum_l W^(1+l)(H)/l! [z^m] phi1[z]^l)``."""
    second = np.zeros(prof.H.size, dtype=complex)
    for ell in range(2, m.order + 1):
        c = prof.model.dW(prof.H, 1 + ell) / factorial(ell)
        if not np.any(c):
            continue
        second = second + c * _series_coefficient(prof.phi, m, ell)
    return (np.zeros_like(second), second)


def _correction_sum(prof: RefinedProfile, m: MultiIndex, min_order: int):
    """``sum i (lam_n . m') phi_m'`` over ``m' + n = m``, ``n`` non-zero in ``Lambda_0``."""
    out1 = np.zeros(prof.H.size, dtype=complex)
    out2 = np.zeros_like(out1)
    for n in prof.structure.Lambda_0:
        if n.order == 0 or not m.contains(n):
            continue
        mp = m - n
        if mp.order < min_order or mp not in prof.phi:
            continue
        coef = 1j * mp.dot(prof.lambda_vector(n))
        if coef != 0:
            a, b = prof.phi[mp]
            out1 = out1 + coef * a
            out2 = out2 + coef * b
    return out1, out2


def _assemble_K(prof: RefinedProfile, m: MultiIndex):
    g = _g_source(prof, m)
    c = _correction_sum(prof, m, min_order=2)
    return (g[0] - c[0], g[1] - c[1])


def _solve(prof: RefinedProfile, m: MultiIndex, E, deflate_j: int | None):
    """Scalar reduction of ``(L1 + i mu) u = E`` with ``mu = lam . m``."""
    mu = m.dot(prof.lambdas)
    rhs = 1j * mu * E[0] - E[1]
    rhs = rhs.copy()
    rhs[0] = rhs[-1] = 0.0
    f = GridFunction(prof.grid, rhs, ODD)
    if deflate_j is None:
        try:
            u1 = resolvent_solve(prof.op, mu * mu, f).values
        except NearSingularError as exc:
            raise GenericityViolation(f"index {m}: {exc}") from exc
    else:
        phi = GridFunction(prof.grid, prof.modes[deflate_j], ODD)
        u1 = resolvent_solve(prof.op, mu * mu, f, deflate=(mu * mu, phi)).values
    u2 = E[0] - 1j * mu * u1
    u2 = u2.copy()
    u2[0] = u2[-1] = 0.0
    return (u1, u2)


def _remove_component(prof: RefinedProfile, u, j: int, conj: bool):
    """Drop the ``Phi_j`` (or ``conj Phi_j``) component in the symplectic splitting."""
    P = prof.Phi(j, conj=conj)
    Pc = prof.Phi(j, conj=not conj)
    # coefficient of P is i (J u, conj P) / (i (J P, conj P))^{-1}-normalized
    norm = _bilinear(_J(P), Pc, prof.h)
    a = _bilinear(_J(u), Pc, prof.h) / norm
    return (u[0] - a * P[0], u[1] - a * P[1])


def build_refined_profile(model: PotentialModel, kink: KinkData, spectral: SpectralData,
                          structure: ResonanceStructure, order: int | None = None) -> RefinedProfile:
    """Construct ``phi_m`` for ``m`` in ``NR`` up to ``|m| = order``.

    Parameters
    ----------
    spectral : SpectralData
        Odd-sector spectrum of ``L_1``; its matrix eigenvalues and vectors
        define ``lam_j`` and ``phi_j``.
    order : int, optional
        Defaults to ``min(M, 3)``; may not exceed ``M``.
    """
    if spectral.sector != ODD:
        raise InvalidInputError("profile construction needs the odd-sector spectrum")
    N = structure.N
    pos = [i for i, v in enumerate(spectral.discrete_eigenvalues) if v > 0]
    if len(pos) != N:
        raise InvalidInputError(f"structure has {N} modes but the spectrum has {len(pos)}")
    order = min(structure.M, 3) if order is None else int(order)
    if order > structure.M or order < 1:
        raise InvalidInputError(f"order must lie in [1, M={structure.M}]")
    op = linearized_operator(kink, ODD)
    lams = np.sqrt(spectral.discrete_eigenvalues[pos])
    modes = [normalize_internal_mode(spectral.eigenfunctions[i], lam).values
             for i, lam in zip(pos, lams)]
    H = kink.H.restrict_half().values
    prof = RefinedProfile(model, op, structure, H, lams, modes)
    zero = MultiIndex.zero(N)
    prof.phi[zero] = (H.astype(complex), np.zeros(H.size, dtype=complex))
    for j in range(N):
        e = MultiIndex.unit(j, N)
        prof.phi[e] = prof.Phi(j)
        prof.phi[e.conj] = prof.Phi(j, conj=True)
        prof.lambda_jm[(j, e)] = float(lams[j])
        prof.lambda_conj[(j, e)] = float(lams[j])
    for k in range(2, order + 1):
        level = [m for m in structure.NR if m.order == k]
        # Lambda-type indices first: they fix the corrections used at this level
        lam_type = []
        for m in level:
            j = structure.lambda_index(m)
            jc = structure.lambda_index(m.conj)
            if j is not None or jc is not None:
                lam_type.append((m, j, jc))
        values = {}
        for m, j, jc in lam_type:
            K = _assemble_K(prof, m)
            if j is not None:
                P = prof.Phi(j, conj=True)
                lam_n = _bilinear(_J(K), P, prof.h)
                E = (K[0] - 1j * lam_n * prof.Phi(j)[0], K[1] - 1j * lam_n * prof.Phi(j)[1])
                values[m] = (K, E, j, False, lam_n)
            else:
                P = prof.Phi(jc)
                lam_n = _bilinear(_J(K), P, prof.h)
                Pc = prof.Phi(jc, conj=True)
                E = (K[0] + 1j * lam_n * Pc[0], K[1] + 1j * lam_n * Pc[1])
                values[m] = (K, E, jc, True, lam_n)
        for m, (K, E, j, is_conj, lam_n) in values.items():
            if abs(lam_n.imag) > 1e-8 * max(1.0, abs(lam_n)):
                raise InternalConsistencyError(f"frequency correction at {m} is not real: {lam_n}")
            if is_conj:
                prof.lambda_conj[(j, m.conj)] = float(lam_n.real)
            else:
                prof.lambda_jm[(j, m)] = float(lam_n.real)
            u = _solve(prof, m, E, deflate_j=j)
            u = _remove_component(prof, u, j, conj=is_conj)
            prof.sources[m] = E
            prof.phi[m] = u
        for m in level:
            if m in values:
                continue
            E = _assemble_K(prof, m)
            prof.sources[m] = E
            prof.phi[m] = _solve(prof, m, E, deflate_j=None)
        prof.order = k
        for m in level:
            prof.residuals[m] = prof.vector_residual(m)
            u, E = prof.phi[m], prof.sources[m]
            mu = m.dot(prof.lambdas)
            r2 = u[1] + 1j * mu * u[0] - E[0]
            prof.scalar_residuals[m] = float(np.max(np.abs(r2[1:-1])))
    return prof


def compute_rmin_sources(profile: RefinedProfile, structure: ResonanceStructure | None = None
                         ) -> dict:
    """``R_m = -E_m`` for every ``m`` in ``R_min``.

    Raises
    ------
    DependencyError
        If the profile lacks an order needed to assemble some ``E_m``.
    """
    structure = structure or profile.structure
    out = {}
    for m in structure.R_min:
        if profile.order < m.order - 1:
            raise DependencyError(f"source {m} needs the profile to order {m.order - 1}, "
                                  f"have {profile.order}")
        g = _g_source(profile, m)
        c = _correction_sum(profile, m, min_order=1)
        out[m] = (-(g[0] - c[0]), -(g[1] - c[1]))
    return out


def discrete_projection(profile: RefinedProfile, u):
    """Component of ``u`` along ``span{Phi_j, conj Phi_j}`` (symplectic splitting)."""
    h = profile.h
    p1 = np.zeros_like(u[0], dtype=complex)
    p2 = np.zeros_like(p1)
    for j in range(profile.N):
        P, Pc = profile.Phi(j), profile.Phi(j, conj=True)
        a = 1j * _bilinear(_J(u), Pc, h)
        b = -1j * _bilinear(_J(u), P, h)
        p1 = p1 + a * P[0] + b * Pc[0]
        p2 = p2 + a * P[1] + b * Pc[1]
    return p1, p2


@dataclass(frozen=True)
class FgrEntry:
    m: MultiIndex
    r: float
    k: float
    ft_plus: tuple[complex, complex]
    ft_minus: tuple[complex, complex]
    gamma: float
    gamma_projected: float
    nondegenerate: bool


@dataclass(frozen=True)
class FgrReport:
    entries: tuple[FgrEntry, ...]
    threshold: float
    convention: str

    @property
    def nondegenerate(self) -> bool:
        return bool(self.entries) and all(e.nondegenerate for e in self.entries)

    def __getitem__(self, m: MultiIndex) -> FgrEntry:
        for e in self.entries:
            if e.m == m:
                return e
        raise KeyError(str(m))


def _gamma(src, jost: JostData, r: float, k: float, grid):
    g1 = GridFunction(grid, src[0], ODD)
    g2 = GridFunction(grid, src[1], ODD)
    ks = np.array([k, -k])
    f1 = distorted_ft(g1, jost, ks)
    f2 = distorted_ft(g2, jost, ks)
    val = -1j * r * f1 + f2
    gamma = np.pi / (2.0 * np.sqrt(r)) * float(np.sum(np.abs(val) ** 2))
    return gamma, (f1[0], f2[0]), (f1[1], f2[1])


def fgr_coefficient(sources: dict, profile: RefinedProfile, jost: JostData,
                    threshold: float = 1e-8, convention: str = "sqrt") -> FgrReport:
    """Fermi Golden Rule magnitudes for each resonant source.

    ``gamma_m = pi/(2 sqrt r) sum_{+-} |-i r R1^(+-k) + R2^(+-k)|^2`` with
    ``r = sqrt((lam.m)^2 - omega^2)``. ``convention="sqrt"`` evaluates at
    ``k = sqrt(r)``; ``"dispersion"`` uses ``k = r``, the wavenumber of
    radiation at frequency ``lam.m``. Route (a) transforms the raw
    components; route (b) first removes the discrete component.

    Raises
    ------
    InternalConsistencyError
        If the two routes differ by more than 1e-2 relative.
    """
    if convention not in ("sqrt", "dispersion"):
        raise InvalidInputError("convention must be 'sqrt' or 'dispersion'")
    lams = profile.structure.lambdas
    om2 = profile.structure.omega ** 2
    entries = []
    for m in sorted(sources, key=MultiIndex.sort_key):
        src = sources[m]
        mu = m.dot(lams)
        if mu * mu <= om2:
            raise InvalidInputError(f"index {m} is not radiating")
        r = float(np.sqrt(mu * mu - om2))
        k = float(np.sqrt(r)) if convention == "sqrt" else r
        ga, fp, fm = _gamma(src, jost, r, k, profile.grid)
        pd = discrete_projection(profile, src)
        gb, _, _ = _gamma((src[0] - pd[0], src[1] - pd[1]), jost, r, k, profile.grid)
        scale = max(ga, gb)
        rel = abs(ga - gb) / scale if scale > 0 else 0.0
        if scale >= threshold and rel > 1e-2:
            raise InternalConsistencyError(f"FGR routes disagree at {m}: {ga:.6e} vs {gb:.6e}")
        nondeg = ga >= threshold and gb >= threshold and rel <= 1e-3
        entries.append(FgrEntry(m, r, k, fp, fm, float(ga), float(gb), bool(nondeg)))
    return FgrReport(tuple(entries), threshold, convention)


def _field_residual(prof: RefinedProfile, u):
    """``(u2, u1'' - W'(u1))`` with the discrete Laplacian on stored nodes."""
    h = prof.h
    u1, u2 = u
    r2 = np.zeros_like(u1)
    r2[1:-1] = (u1[2:] - 2.0 * u1[1:-1] + u1[:-2]) / h**2 - prof.model.dW(u1[1:-1], 1)
    r1 = u2.copy()
    r1[0] = r1[-1] = 0.0
    return r1, r2


def profile_orthogonality_check(profile: RefinedProfile, z, sources: dict | None = None) -> float:
    """Largest ``|<J R[z], D_z phi[z] zeta>|`` over ``zeta in {e_j, i e_j}``.

    ``R[z]`` is the field residual of ``phi[z]`` minus ``D_z phi[z] ztilde``.
    The static residual at ``z = 0`` (pure discretization error) is
    subtracted. The correction ``ztilde_R`` is obtained from the linear
    system that makes the truncated resonant part
    ``sum_{R_min} z^m R_m - D_z phi ztilde_R`` orthogonal to the frame.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    N = profile.N
    if z.size != N:
        raise InvalidInputError(f"z must have {N} components")
    if sources is None:
        sources = compute_rmin_sources(profile)
    h = profile.h
    Rhat = profile.residual(z)
    S1 = np.zeros_like(Rhat[0])
    S2 = np.zeros_like(Rhat[0])
    for m, (a, b) in sources.items():
        c = m.monomial(z)
        S1 = S1 + c * a
        S2 = S2 + c * b
    basis = []
    for j in range(N):
        e = np.zeros(N, dtype=complex)
        e[j] = 1.0
        basis.extend([e, 1j * e])
    frame = [profile.dz_field(z, zeta) for zeta in basis]
    A = np.array([[_real_pair(_J(fc), fb, h) for fc in frame] for fb in frame])
    rhs = np.array([_real_pair(_J((S1, S2)), fb, h) for fb in frame])
    if np.linalg.cond(A) > 1e12:
        raise DegenerateFrameError("frame matrix is singular")
    t = np.linalg.solve(A, rhs)
    corr1 = sum(tc * fc[0] for tc, fc in zip(t, frame))
    corr2 = sum(tc * fc[1] for tc, fc in zip(t, frame))
    res = (Rhat[0] - corr1, Rhat[1] - corr2)
    return float(max(abs(_real_pair(_J(res), fb, h)) for fb in frame))
