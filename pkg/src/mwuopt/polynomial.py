"""Sparse multivariate polynomials in the variables ``x_ij``.

Exponents are stored as sorted tuples of ``(flat_index, power)`` pairs, so two
polynomials with the same terms compare and hash equal regardless of the order
they were built in.  Evaluation is vectorised over a dense exponent matrix
compiled once per polynomial.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError, ParseError
from .simplex import DomainShape, as_shape

Exponents = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Monomial:
    coefficient: float
    exponents: Exponents = ()

    def __post_init__(self):
        merged: dict[int, int] = {}
        for idx, power in self.exponents:
            if int(power) != power or power < 1:
                raise InputError(f"powers must be positive integers, got {power}")
            merged[int(idx)] = merged.get(int(idx), 0) + int(power)
        object.__setattr__(self, "coefficient", float(self.coefficient))
        object.__setattr__(self, "exponents", tuple(sorted(merged.items())))

    @property
    def degree(self) -> int:
        return sum(p for _, p in self.exponents)


class SparsePolynomial:
    """Polynomial over ``N x M`` variables in canonical merged form.

    ``terms`` maps an exponent tuple to its coefficient; repeated exponent
    tuples are summed and exact zeros dropped.
    """

    def __init__(self, shape, terms: Mapping[Exponents, float] | Iterable[Monomial] = ()):
        self.shape: DomainShape = as_shape(shape)
        merged: dict[Exponents, float] = {}
        items = terms.items() if isinstance(terms, Mapping) else ((t.exponents, t.coefficient) for t in terms)
        for exps, coef in items:
            key = Monomial(coef, tuple(exps)).exponents
            for idx, _ in key:
                if not 0 <= idx < self.shape.size:
                    raise InputError(f"variable index {idx} outside a {self.shape.n}x{self.shape.m} domain")
            merged[key] = merged.get(key, 0.0) + float(coef)
        self._init_from(merged)

    def _init_from(self, merged: dict[Exponents, float]) -> None:
        keys = sorted(k for k, c in merged.items() if c != 0.0)
        self._keys: tuple[Exponents, ...] = tuple(keys)
        self._coeffs = np.array([merged[k] for k in keys], dtype=float)
        if not np.all(np.isfinite(self._coeffs)):
            raise InputError("polynomial coefficients must be finite")

    @classmethod
    def _from_sorted(cls, shape: DomainShape, keys, coeffs) -> "SparsePolynomial":
        # fast path: keys already canonical and sorted, coeffs aligned
        obj = cls.__new__(cls)
        obj.shape = shape
        coeffs = np.asarray(coeffs, dtype=float)
        keep = coeffs != 0.0
        obj._keys = tuple(k for k, kp in zip(keys, keep) if kp)
        obj._coeffs = coeffs[keep]
        return obj

    @classmethod
    def constant(cls, shape, value: float) -> "SparsePolynomial":
        return cls(shape, {(): value})

    @classmethod
    def variable(cls, shape, i: int, j: int) -> "SparsePolynomial":
        shape = as_shape(shape)
        return cls(shape, {((shape.flat_index(i, j), 1),): 1.0})

    # -- structure -------------------------------------------------------

    @property
    def monomials(self) -> list[Monomial]:
        return [Monomial(c, k) for k, c in zip(self._keys, self._coeffs)]

    @property
    def terms(self) -> dict[Exponents, float]:
        return dict(zip(self._keys, self._coeffs.tolist()))

    def __len__(self) -> int:
        return len(self._keys)

    def coefficient(self, exponents: Exponents) -> float:
        key = Monomial(1.0, tuple(exponents)).exponents
        return self.terms.get(key, 0.0)

    def degree(self) -> int:
        return max((sum(p for _, p in k) for k in self._keys), default=0)

    def total_degrees(self) -> np.ndarray:
        return np.array([sum(p for _, p in k) for k in self._keys], dtype=int)

    def is_homogeneous(self) -> bool:
        return len(set(self.total_degrees().tolist())) <= 1

    def nonneg_coefficients(self) -> bool:
        return bool(np.all(self._coeffs >= 0.0))

    def min_coefficient(self) -> float:
        return float(self._coeffs.min()) if len(self._coeffs) else 0.0

    # -- arithmetic ------------------------------------------------------

    def _check_compatible(self, other: "SparsePolynomial") -> None:
        if other.shape != self.shape:
            raise InputError("polynomials live on different domains")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = SparsePolynomial.constant(self.shape, other)
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        self._check_compatible(other)
        merged = self.terms
        for k, c in other.terms.items():
            merged[k] = merged.get(k, 0.0) + c
        return SparsePolynomial(self.shape, merged)

    __radd__ = __add__

    def __neg__(self):
        return SparsePolynomial._from_sorted(self.shape, self._keys, -self._coeffs)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return self + (-other)
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return SparsePolynomial._from_sorted(self.shape, self._keys, self._coeffs * float(other))
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        self._check_compatible(other)
        merged: dict[Exponents, float] = {}
        for k1, c1 in zip(self._keys, self._coeffs):
            for k2, c2 in zip(other._keys, other._coeffs):
                key = Monomial(1.0, k1 + k2).exponents
                merged[key] = merged.get(key, 0.0) + c1 * c2
        return SparsePolynomial(self.shape, merged)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return (
            self.shape == other.shape
            and self._keys == other._keys
            and np.array_equal(self._coeffs, other._coeffs)
        )

    def __hash__(self) -> int:
        return hash((self.shape, self._keys, self._coeffs.tobytes()))

    def __repr__(self) -> str:
        return f"SparsePolynomial({self.shape.n}x{self.shape.m}, {self.to_text(sep=' + ')!r})"

    # -- evaluation ------------------------------------------------------

    @cached_property
    def _exponent_matrix(self) -> np.ndarray:
        mat = np.zeros((len(self._keys), self.shape.size), dtype=np.int64)
        for row, key in enumerate(self._keys):
            for idx, power in key:
                mat[row, idx] = power
        return mat

    def _flat(self, x) -> np.ndarray:
        flat = np.asarray(getattr(x, "values", x), dtype=float).reshape(-1)
        if flat.size != self.shape.size:
            raise InputError(f"point has {flat.size} coordinates, polynomial expects {self.shape.size}")
        return flat

    def value(self, x) -> float:
        flat = self._flat(x)
        if not len(self._keys):
            return 0.0
        return float(np.prod(flat ** self._exponent_matrix, axis=1) @ self._coeffs)

    def gradient(self, x) -> np.ndarray:
        flat = self._flat(x)
        if not len(self._keys):
            return np.zeros(self.shape.as_tuple())
        e = self._exponent_matrix
        powers = flat ** e
        # product over all other variables, without dividing by possibly-zero factors
        ones = np.ones((len(e), 1))
        before = np.cumprod(np.hstack([ones, powers[:, :-1]]), axis=1)
        after = np.cumprod(np.hstack([ones, powers[:, :0:-1]]), axis=1)[:, ::-1]
        deriv = np.zeros_like(powers)
        np.power(np.broadcast_to(flat, e.shape), e - 1, out=deriv, where=e > 0)
        deriv *= e
        return (self._coeffs @ (deriv * before * after)).reshape(self.shape.as_tuple())

    def hessian(self, x) -> np.ndarray:
        flat = self._flat(x)
        n = self.shape.size
        out = np.zeros((n, n))
        for key, coef in zip(self._keys, self._coeffs):
            idx = [v for v, _ in key]
            pw = [p for _, p in key]
            base = [flat[v] ** p for v, p in zip(idx, pw)]
            first = [p * flat[v] ** (p - 1) for v, p in zip(idx, pw)]
            for a in range(len(idx)):
                rest_a = math.prod(base[:a] + base[a + 1:])
                if pw[a] >= 2:
                    out[idx[a], idx[a]] += coef * pw[a] * (pw[a] - 1) * flat[idx[a]] ** (pw[a] - 2) * rest_a
                for b in range(a + 1, len(idx)):
                    rest_ab = math.prod(base[k] for k in range(len(idx)) if k != a and k != b)
                    term = coef * first[a] * first[b] * rest_ab
                    out[idx[a], idx[b]] += term
                    out[idx[b], idx[a]] += term
        return out

    # -- text format -----------------------------------------------------

    def to_text(self, sep: str = "\n") -> str:
        m = self.shape.m
        lines = []
        for key, coef in zip(self._keys, self._coeffs):
            parts = [repr(float(coef))]
            parts += [f"{v // m + 1}:{v % m + 1}^{p}" for v, p in key]
            lines.append(" ".join(parts))
        return sep.join(lines) if lines else "0.0"


_VAR = re.compile(r"^(\d+):(\d+)(?:\^(\d+))?$")


def parse_terms(lines: Iterable[str], first_lineno: int = 1) -> list[tuple[float, list[tuple[int, int, int]]]]:
    """Parse monomial lines into ``(coeff, [(i, j, power), ...])`` with 1-based i, j."""
    out = []
    for lineno, raw in enumerate(lines, start=first_lineno):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            coef = float(tokens[0])
        except ValueError:
            raise ParseError(f"line {lineno}: bad coefficient {tokens[0]!r}") from None
        if not math.isfinite(coef):
            raise ParseError(f"line {lineno}: coefficient must be finite")
        factors = []
        for tok in tokens[1:]:
            match = _VAR.match(tok)
            if not match:
                raise ParseError(f"line {lineno}: bad factor {tok!r}, expected <i>:<j>^<pow>")
            i, j, p = int(match[1]), int(match[2]), int(match[3] or 1)
            if i < 1 or j < 1 or p < 1:
                raise ParseError(f"line {lineno}: indices and powers are 1-based positive integers")
            factors.append((i, j, p))
        out.append((coef, factors))
    return out


def polynomial_from_terms(terms, shape) -> SparsePolynomial:
    shape = as_shape(shape)
    merged: dict[Exponents, float] = {}
    for coef, factors in terms:
        for i, j, _ in factors:
            if i > shape.n or j > shape.m:
                raise ParseError(f"variable {i}:{j} outside a {shape.n}x{shape.m} domain")
        key = Monomial(1.0, tuple((shape.flat_index(i - 1, j - 1), p) for i, j, p in factors)).exponents
        merged[key] = merged.get(key, 0.0) + coef
    return SparsePolynomial(shape, merged)


def infer_shape(*term_lists) -> DomainShape:
    n = m = 1
    for terms in term_lists:
        for _, factors in terms:
            for i, j, _ in factors:
                n, m = max(n, i), max(m, j)
    return DomainShape(n, max(m, 2))


def parse_polynomial(text: str, shape=None) -> SparsePolynomial:
    terms = parse_terms(text.splitlines())
    return polynomial_from_terms(terms, shape if shape is not None else infer_shape(terms))
