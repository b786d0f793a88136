"""Independent reference computations used to check the package.

Nothing here calls into the code it is meant to check: derivatives come from
central differences, polynomial values from exact rational arithmetic, and
eigenvalues from the characteristic polynomial (Faddeev-LeVerrier in high
precision) rooted by mpmath.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

from mwuopt.polynomial import SparsePolynomial

# Frozen values.  Each was worked out by hand and re-derived with the oracles
# below before being written down.

# x1 dP/dx1 = x1 + 7 x1^7 x2 at x1 = x2 = 1/2: 1/2 + 7/256
COUNTEREXAMPLE_NUMERATOR_AT_HALF = 0.52734375
# off-support eigenvalue (1 + eps g) / S for P = 2 x11 + x12 at (0, 1), eps = 1/10
LINEAR_VERTEX_WITNESS = 12.0 / 11.0
# coord-2x2 at the uniform point, eps = 1/10: the reduced map has eigenvalue
# 1 + eps / (2 S) * 2 with S = 1 + eps / 2, i.e. 22 / 21 (double root)
COORD_MIXED_RADIUS = 22.0 / 21.0
# maximisers of cos(8x) sin(6y) on the unit square
TRIG_MAXIMIZERS = [(0.0, np.pi / 12), (np.pi / 4, np.pi / 12), (np.pi / 8, np.pi / 4)]


def fd_jacobian(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of ``f`` (array in, array out) with respect to every entry of ``x``."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    cols = []
    for k in range(flat.size):
        up, dn = flat.copy(), flat.copy()
        up[k] += h
        dn[k] -= h
        cols.append((np.asarray(f(up.reshape(x.shape))) - np.asarray(f(dn.reshape(x.shape)))).reshape(-1) / (2 * h))
    return np.column_stack(cols)


def fd_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    return fd_jacobian(lambda z: np.array([f(z)]), x, h).reshape(np.shape(x))


def exact_value(p: SparsePolynomial, x) -> Fraction:
    """``p(x)`` with every float converted exactly to a fraction."""
    xs = [Fraction(float(v)) for v in np.asarray(x, dtype=float).reshape(-1)]
    total = Fraction(0)
    for key, coeff in p.terms.items():
        term = Fraction(coeff)
        for idx, power in key:
            term *= xs[idx] ** power
        total += term
    return total


def charpoly(a: np.ndarray, dps: int = 50) -> list:
    """Coefficients (leading first) of ``det(z I - A)`` by Faddeev-LeVerrier."""
    with mpmath.workdps(dps):
        n = a.shape[0]
        m = mpmath.matrix(a.tolist())
        eye = mpmath.eye(n)
        coeffs = [mpmath.mpf(1)]
        mk = mpmath.zeros(n, n)
        c = mpmath.mpf(1)
        for k in range(1, n + 1):
            mk = m * mk + c * eye
            am = m * mk
            c = -sum(am[i, i] for i in range(n)) / k
            coeffs.append(c)
        return coeffs


def eigenvalues(a: np.ndarray, dps: int = 50) -> list[complex]:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return []
    with mpmath.workdps(dps):
        roots = mpmath.polyroots(charpoly(a, dps), maxsteps=500, extraprec=4 * dps)
    return [complex(r) for r in np.atleast_1d(roots)]


def spectral_radius(a: np.ndarray) -> float:
    return max((abs(z) for z in eigenvalues(a)), default=0.0)


def random_nonneg_polynomial(rng: np.random.Generator, n: int, m: int, degree: int,
                             terms: int) -> SparsePolynomial:
    """Random positive coefficients; every player gets at least one linear term."""
    out: dict = {}

    def add(key, c):
        out[key] = out.get(key, 0.0) + c

    for _ in range(terms):
        d = int(rng.integers(1, degree + 1))
        powers: dict = {}
        for k in rng.integers(0, n * m, size=d):
            powers[int(k)] = powers.get(int(k), 0) + 1
        add(tuple(sorted(powers.items())), float(rng.uniform(0.1, 2.0)))
    for i in range(n):
        add(((i * m + int(rng.integers(0, m)), 1),), float(rng.uniform(0.1, 2.0)))
    return SparsePolynomial((n, m), out)
