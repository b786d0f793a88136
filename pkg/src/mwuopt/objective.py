"""Objectives on products of simplices and the rational Baum-Eagon surrogate.

Every objective exposes ``shape``, ``value(x)``, ``gradient(x)`` (an ``N x M``
array) and ``hessian(x)`` (``NM x NM``, flat index ``i * M + j``), all taking
raw arrays so that they can be probed off the simplex by finite differences.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Protocol, Union

import numpy as np

from .errors import DenominatorNonPositiveError, HessianUnavailableError, InputError, ParseError
from .polynomial import (
    SparsePolynomial,
    infer_shape,
    parse_terms,
    polynomial_from_terms,
)
from .simplex import DomainShape, StrategyProfile, as_shape, random_profiles

FD_STEP = 1e-5


class Objective(Protocol):
    shape: DomainShape

    def value(self, x) -> float: ...

    def gradient(self, x) -> np.ndarray: ...

    def hessian(self, x) -> np.ndarray: ...


def _values(obj, x) -> np.ndarray:
    arr = np.asarray(x.values if isinstance(x, StrategyProfile) else x, dtype=float)
    if arr.shape != obj.shape.as_tuple():
        raise InputError(f"point shape {arr.shape} does not match objective shape {obj.shape.as_tuple()}")
    return arr


def evaluate(obj: Objective, x) -> float:
    return float(obj.value(_values(obj, x)))


def gradient(obj: Objective, x) -> np.ndarray:
    return np.asarray(obj.gradient(_values(obj, x)), dtype=float).reshape(obj.shape.as_tuple())


def hessian(obj: Objective, x) -> np.ndarray:
    return np.asarray(obj.hessian(_values(obj, x)), dtype=float)


def has_hessian(obj) -> bool:
    return not isinstance(obj, BlackBoxObjective) or obj.hess is not None


class RationalObjective:
    """``S1 / S2`` with a denominator that must stay positive where evaluated."""

    def __init__(self, numerator: SparsePolynomial, denominator: SparsePolynomial):
        if numerator.shape != denominator.shape:
            raise InputError("numerator and denominator live on different domains")
        self.numerator = numerator
        self.denominator = denominator
        self.shape = numerator.shape

    def __repr__(self) -> str:
        return f"RationalObjective({self.numerator!r} / {self.denominator!r})"

    def _denominator(self, x) -> float:
        s2 = self.denominator.value(x)
        if not s2 > 0.0:
            raise DenominatorNonPositiveError(f"denominator is {s2!r} at the requested point")
        return s2

    def value(self, x) -> float:
        return self.numerator.value(x) / self._denominator(x)

    def gradient(self, x) -> np.ndarray:
        s2 = self._denominator(x)
        r = self.numerator.value(x) / s2
        return (self.numerator.gradient(x) - r * self.denominator.gradient(x)) / s2

    def hessian(self, x) -> np.ndarray:
        s2 = self._denominator(x)
        r = self.numerator.value(x) / s2
        g2 = self.denominator.gradient(x).reshape(-1)
        gr = (self.numerator.gradient(x).reshape(-1) - r * g2) / s2
        h = self.numerator.hessian(x) - r * self.denominator.hessian(x)
        h -= np.outer(gr, g2) + np.outer(g2, gr)
        return h / s2


@dataclass(frozen=True)
class BlackBoxObjective:
    """Objective given by callables.

    The callables must be side-effect free.  Without ``hess`` the objective
    still supports first-order work; second-order classification refuses.
    """

    shape: DomainShape
    func: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = field(default="black-box", compare=False)

    def value(self, x) -> float:
        return float(self.func(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(x, dtype=float)), dtype=float).reshape(self.shape.as_tuple())

    def hessian(self, x) -> np.ndarray:
        if self.hess is None:
            raise HessianUnavailableError(f"{self.name} objective has no Hessian")
        return np.asarray(self.hess(np.asarray(x, dtype=float)), dtype=float)

    def gradient_error(self, samples: int = 20, seed: int = 0, h: float = FD_STEP) -> float:
        """Largest relative gap between ``grad`` and central differences of ``func``."""
        worst = 0.0
        for p in random_profiles(self.shape, samples, seed):
            x = p.values
            g = self.gradient(x).reshape(-1)
            fd = np.empty_like(g)
            flat = x.reshape(-1)
            for k in range(flat.size):
                step = np.zeros_like(flat)
                step[k] = h
                fd[k] = (self.value((flat + step).reshape(x.shape)) - self.value((flat - step).reshape(x.shape))) / (2 * h)
            worst = max(worst, float(np.max(np.abs(fd - g) / np.maximum(np.abs(g), 1.0))))
        return worst

    def self_test(self, samples: int = 20, seed: int = 0, rtol: float = 1e-5) -> bool:
        return self.gradient_error(samples, seed) <= rtol


AnyObjective = Union[SparsePolynomial, RationalObjective, BlackBoxObjective]


# -- rational Baum-Eagon surrogate ------------------------------------------


def multinomial_weight(exponents, degree: int) -> int:
    """Coefficient of ``prod x^e`` in ``(sum x + 1) ** degree``."""
    powers = [p for _, p in exponents]
    rest = degree - sum(powers)
    if rest < 0:
        return 0
    out = math.factorial(degree) // math.factorial(rest)
    for p in powers:
        out //= math.factorial(p)
    return out


@lru_cache(maxsize=32)
def _expansion(size: int, degree: int):
    """Canonical keys and weights of ``(sum_k x_k + 1) ** degree`` over ``size`` variables."""
    keys = []
    for combo in itertools.combinations_with_replacement(range(size + 1), degree):
        counts: dict[int, int] = {}
        for v in combo:
            if v < size:
                counts[v] = counts.get(v, 0) + 1
        keys.append(tuple(sorted(counts.items())))
    keys.sort()
    weights = np.array([multinomial_weight(k, degree) for k in keys], dtype=float)
    index = {k: pos for pos, k in enumerate(keys)}
    return tuple(keys), weights, index


@dataclass(frozen=True, eq=False)
class SurrogatePolynomial:
    """``Q_y = P_y + N_y (sum x + 1)^d`` with ``P_y = S1 - R(y) S2``.

    ``value``/``gradient`` use the closed form of the shift term; ``q_y`` is
    the fully expanded polynomial, built on first access.
    """

    base: RationalObjective
    anchor: StrategyProfile
    p_y: SparsePolynomial
    c_y_constant: float
    surrogate_degree: int

    @property
    def shape(self) -> DomainShape:
        return self.p_y.shape

    @cached_property
    def q_y(self) -> SparsePolynomial:
        if self.c_y_constant == 0.0:
            return self.p_y
        keys, weights, index = _expansion(self.shape.size, self.surrogate_degree)
        coeffs = self.c_y_constant * weights
        for key, coef in self.p_y.terms.items():
            coeffs[index[key]] += coef
        # the binding monomial cancels up to rounding
        scale = self.c_y_constant * weights
        tiny = (coeffs < 0.0) & (coeffs >= -1e-12 * np.maximum(scale, 1.0))
        coeffs[tiny] = 0.0
        return SparsePolynomial._from_sorted(self.shape, keys, coeffs)

    def value(self, x) -> float:
        flat = np.asarray(x, dtype=float).reshape(-1)
        return self.p_y.value(x) + self.c_y_constant * (flat.sum() + 1.0) ** self.surrogate_degree

    def gradient(self, x) -> np.ndarray:
        flat = np.asarray(x, dtype=float).reshape(-1)
        d = self.surrogate_degree
        shift = self.c_y_constant * d * (flat.sum() + 1.0) ** (d - 1)
        return self.p_y.gradient(x) + shift

    def hessian(self, x) -> np.ndarray:
        flat = np.asarray(x, dtype=float).reshape(-1)
        d = self.surrogate_degree
        shift = self.c_y_constant * d * (d - 1) * (flat.sum() + 1.0) ** (d - 2) if d >= 2 else 0.0
        return self.p_y.hessian(x) + shift

    def nonneg_coefficients(self) -> bool:
        return self.q_y.nonneg_coefficients()


def build_surrogate(r: RationalObjective, y: StrategyProfile) -> SurrogatePolynomial:
    """Smallest nonnegative shift making ``S1 - R(y) S2`` coefficient-wise nonnegative."""
    ry = r.value(_values(r, y))
    p_y = r.numerator - r.denominator * ry
    degree = max(p_y.degree(), 1)
    n_y = 0.0
    for key, coef in p_y.terms.items():
        if coef < 0.0:
            n_y = max(n_y, -coef / multinomial_weight(key, degree))
    return SurrogatePolynomial(r, y, p_y, n_y, degree)


# -- objective text format --------------------------------------------------


def _shape_directive(lines: list[str]):
    for pos, raw in enumerate(lines):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("shape"):
            parts = line.replace(":", " ").split()
            try:
                return DomainShape(int(parts[1]), int(parts[2])), pos + 1
            except (IndexError, ValueError) as exc:
                raise ParseError(f"line {pos + 1}: bad shape directive ({exc})") from None
        break
    return None, 0


def parse_objective(text: str, shape=None) -> SparsePolynomial | RationalObjective:
    """Parse the monomial-per-line format; a ``---`` line separates numerator and denominator.

    An optional leading ``shape N M`` line fixes the domain; otherwise it is
    the smallest one containing every variable mentioned.
    """
    lines = text.splitlines()
    directive, skip = _shape_directive(lines)
    if shape is None:
        shape = directive
    blocks: list[list[tuple[int, str]]] = [[]]
    for lineno, line in enumerate(lines[skip:], start=skip + 1):
        if line.strip() == "---":
            blocks.append([])
        else:
            blocks[-1].append((lineno, line))
    if len(blocks) > 2:
        raise ParseError("at most one '---' separator is allowed")
    parsed = []
    for block in blocks:
        terms = []
        for lineno, line in block:
            terms += parse_terms([line], first_lineno=lineno)
        parsed.append(terms)
    if not any(parsed[0]) and len(parsed) == 1:
        raise ParseError("objective file contains no monomials")
    shape = as_shape(shape) if shape is not None else infer_shape(*parsed)
    polys = [polynomial_from_terms(t, shape) for t in parsed]
    if len(polys) == 1:
        return polys[0]
    if not len(polys[1]):
        raise ParseError("denominator block is empty")
    return RationalObjective(polys[0], polys[1])


def load_objective(source: str) -> AnyObjective:
    """Resolve a built-in id or read an objective file."""
    from .builtins import BUILTINS, get_builtin

    if source in BUILTINS:
        return get_builtin(source)
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read objective {source!r}: {exc.strerror}") from None
    return parse_objective(text)
