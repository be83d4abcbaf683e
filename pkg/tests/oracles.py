"""Independent reference implementations used by the tests."""

import numpy as np
from scipy import integrate


def _bounded(parts, budget):
    """All non-negative integer tuples of length ``parts`` with sum ``<= budget``."""
    if parts == 0:
        yield ()
        return
    for first in range(budget + 1):
        for rest in _bounded(parts - 1, budget - first):
            yield (first,) + rest


def brute_force_sets(lambdas, omega, tol=1e-9):
    """Classify every multi-index with ``|m| <= 2M`` by exhaustive comparison.

    Returns sets of ``(plus, minus)`` tuples: ``R_min``, ``NR``, ``I``.
    """
    lam = np.asarray(lambdas, float)
    N = lam.size
    M = 1
    while M * lam.min() < omega:
        M += 1
    idx = [(v[:N], v[N:]) for v in _bounded(2 * N, 2 * M)]
    tot = np.array([[p + m for p, m in zip(a, b)] for a, b in idx])
    order = tot.sum(1)
    freq = np.abs(np.array([np.dot(lam, np.subtract(a, b)) for a, b in idx]))
    in_R = freq > omega + tol
    R_pos = np.flatnonzero(in_R)
    rmin = set()
    for i in R_pos:
        dominated = np.any((order[R_pos] < order[i]) & np.all(tot[R_pos] <= tot[i], axis=1))
        if not dominated:
            rmin.add(idx[i])
    rpos = np.array([idx.index(m) for m in rmin], dtype=int)
    inter, nr = set(), set()
    for i, m in enumerate(idx):
        if m in rmin:
            continue
        if rpos.size and np.any((order[rpos] < order[i]) & np.all(tot[rpos] <= tot[i], axis=1)):
            inter.add(m)
        else:
            nr.add(m)
    return M, rmin, nr, inter


def phi4_fgr_oracle():
    """FGR magnitude at the index (2,0) from closed forms and adaptive quadrature.

    Uses ``H = tanh(x/sqrt2)``, the internal mode ``c tanh(y) sech(y)``
    normalized to ``||phi||^2 = 1/(2 lam)``, the source ``-3 H phi^2`` and
    the explicit reflectionless generalized eigenfunctions.
    """
    lam = np.sqrt(1.5)
    r = 2.0
    k = np.sqrt(r)
    kap = np.sqrt(2) * k
    c = (9 / 8) ** 0.25 / np.sqrt(2 * lam)

    def e(x, sgn):
        y = x / np.sqrt(2)
        t = np.tanh(y)
        ka = sgn * kap
        return np.exp(1j * ka * y) * (3 * t * t - 3j * ka * t - 1 - ka * ka) / ((1 + 1j * kap) * (2 + 1j * kap))

    def integrand(x, sgn, part):
        y = x / np.sqrt(2)
        ph = c * np.tanh(y) / np.cosh(y)
        v = np.conj(e(x, sgn)) * (-3 * np.tanh(y) * ph**2) / np.sqrt(2 * np.pi)
        return v.real if part == 0 else v.imag

    total = 0.0
    for s in (1, -1):
        re = integrate.quad(integrand, -40, 40, args=(s, 0), epsabs=1e-14, limit=400)[0]
        im = integrate.quad(integrand, -40, 40, args=(s, 1), epsabs=1e-14, limit=400)[0]
        total += re * re + im * im
    return np.pi / (2 * np.sqrt(r)) * total


def random_configs(count=50, seed=20240611):
    """Seeded generic frequency configurations with at most three modes."""
    from kinklab.resonance import check_genericity, enumerate_sets

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        N = int(rng.integers(1, 4))
        omega = float(rng.uniform(0.8, 2.0))
        lam = np.sort(rng.uniform(0.3 * omega, 0.98 * omega, N))
        st = enumerate_sets(lam, omega)
        if check_genericity(st).passed:
            out.append((lam, omega))
    return out
