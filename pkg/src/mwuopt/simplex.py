"""Points of a product of simplices.

A profile is an ``N x M`` array whose rows are probability vectors: row ``i``
is the mixed strategy of player ``i`` over ``M`` strategies.  Flat indices
follow row-major order, ``i * M + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import (
    EmptySupportRowError,
    InputError,
    NegativeEntryError,
    NonFiniteError,
    RowSumViolationError,
)

ROW_SUM_TOL = 1e-12
SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class DomainShape:
    num_players: int
    num_strategies: int

    def __post_init__(self):
        if int(self.num_players) != self.num_players or self.num_players < 1:
            raise InputError(f"need at least one player, got {self.num_players}")
        if int(self.num_strategies) != self.num_strategies or self.num_strategies < 2:
            raise InputError(f"need at least two strategies, got {self.num_strategies}")

    @property
    def n(self) -> int:
        return self.num_players

    @property
    def m(self) -> int:
        return self.num_strategies

    @property
    def size(self) -> int:
        return self.num_players * self.num_strategies

    def as_tuple(self) -> tuple[int, int]:
        return (self.num_players, self.num_strategies)

    def player_of(self) -> np.ndarray:
        """Player index of every flat coordinate."""
        return np.repeat(np.arange(self.n), self.m)

    def flat_index(self, i: int, j: int) -> int:
        return i * self.m + j

    def vertices(self) -> Iterator[np.ndarray]:
        """All ``M**N`` pure profiles as arrays."""
        for choice in np.ndindex(*([self.m] * self.n)):
            v = np.zeros((self.n, self.m))
            v[np.arange(self.n), list(choice)] = 1.0
            yield v


def as_shape(shape) -> DomainShape:
    if isinstance(shape, DomainShape):
        return shape
    n, m = shape
    return DomainShape(int(n), int(m))


def _check_rows(values: np.ndarray, tol: float) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("profile contains NaN or infinite entries")
    low = values.min()
    if low < -tol:
        i, j = np.unravel_index(np.argmin(values), values.shape)
        raise NegativeEntryError(f"entry ({i + 1},{j + 1}) = {low!r} is negative")
    sums = values.sum(axis=1)
    bad = np.abs(sums - 1.0) > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise RowSumViolationError(f"row {i + 1} sums to {sums[i]!r}, not 1")


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Immutable point of D.

    Construction checks the invariants at the strict row-sum tolerance but
    never modifies ``values``; use :func:`validate` to clean up user input.
    """

    shape: DomainShape
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = as_shape(self.shape)
        values = np.array(self.values, dtype=float)
        if values.shape != shape.as_tuple():
            raise InputError(f"expected a {shape.n}x{shape.m} array, got shape {values.shape}")
        _check_rows(values, ROW_SUM_TOL)
        if values.min() < 0.0:
            raise NegativeEntryError("profile entries must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "values", values)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __repr__(self) -> str:
        return f"StrategyProfile({self.values.tolist()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, StrategyProfile):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.shape, self.values.tobytes()))

    def to_dict(self) -> dict:
        return {"n": self.shape.n, "m": self.shape.m, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict, tol: float = ROW_SUM_TOL) -> "StrategyProfile":
        try:
            shape = DomainShape(int(data["n"]), int(data["m"]))
            values = data["values"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"profile JSON needs keys n, m, values: {exc}") from None
        return validate(values, shape, tol)


def validate(values, shape=None, tol: float = ROW_SUM_TOL) -> StrategyProfile:
    """Check ``values`` against D and return a profile.

    Rows whose sum is within ``tol`` of one are renormalised and entries in
    ``[-tol, 0)`` are clamped to zero; anything further off is rejected.
    """
    arr = np.array(values, dtype=float)
    if arr.ndim != 2:
        raise InputError(f"profile must be a 2-d array, got {arr.ndim} dimensions")
    shape = as_shape(arr.shape if shape is None else shape)
    if arr.shape != shape.as_tuple():
        raise InputError(f"expected a {shape.n}x{shape.m} array, got shape {arr.shape}")
    _check_rows(arr, tol)
    arr = np.maximum(arr, 0.0)
    sums = arr.sum(axis=1, keepdims=True)
    if np.any(sums != 1.0):
        arr = arr / sums
    return StrategyProfile(shape, arr)


def random_profile(shape, seed: int) -> StrategyProfile:
    """Uniform draw from the interior of D (flat Dirichlet per row)."""
    return random_profiles(shape, 1, seed)[0]


def random_profiles(shape, count: int, seed: int) -> list[StrategyProfile]:
    shape = as_shape(shape)
    rng = np.random.default_rng(seed)
    draws = rng.dirichlet(np.ones(shape.m), size=(count, shape.n))
    return [validate(d, shape) for d in draws]


@dataclass(frozen=True, eq=False)
class SupportPattern:
    shape: DomainShape
    in_support: np.ndarray = field(repr=False)

    def __post_init__(self):
        mask = np.array(self.in_support, dtype=bool)
        if mask.shape != self.shape.as_tuple():
            raise InputError("support mask does not match the shape")
        empty = ~mask.any(axis=1)
        if np.any(empty):
            raise EmptySupportRowError(f"player {int(np.argmax(empty)) + 1} has empty support")
        mask.setflags(write=False)
        object.__setattr__(self, "in_support", mask)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupportPattern):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.in_support, other.in_support)

    def __repr__(self) -> str:
        return f"SupportPattern({self.in_support.tolist()!r})"

    @property
    def sizes(self) -> np.ndarray:
        return self.in_support.sum(axis=1)

    @property
    def is_interior(self) -> bool:
        return bool(self.in_support.all())


def support(x: StrategyProfile, support_tol: float = SUPPORT_TOL) -> SupportPattern:
    if support_tol < 0:
        raise InputError("support_tol must be nonnegative")
    return SupportPattern(x.shape, x.values > support_tol)


def snap(x: StrategyProfile, support_tol: float = SUPPORT_TOL) -> StrategyProfile:
    """Zero every coordinate at or below ``support_tol`` and renormalise rows."""
    supp = support(x, support_tol)
    vals = np.where(supp.in_support, x.values, 0.0)
    return StrategyProfile(x.shape, vals / vals.sum(axis=1, keepdims=True))
