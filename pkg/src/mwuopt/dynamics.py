"""MWU and Baum-Eagon updates and trajectory execution."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, MWUError, StepSizeTooLargeError, ZeroDenominatorError
from .objective import RationalObjective, build_surrogate, _values
from .polynomial import SparsePolynomial
from .simplex import StrategyProfile, as_shape, random_profiles

EPS_CAP = 1.0


@dataclass(frozen=True, eq=False)
class StepSizes:
    per_player: np.ndarray

    def __post_init__(self):
        eps = np.array(self.per_player, dtype=float).reshape(-1)
        if eps.size == 0 or not np.all(np.isfinite(eps)) or np.any(eps < 0):
            raise InputError(f"step sizes must be finite and nonnegative, got {eps.tolist()}")
        eps.setflags(write=False)
        object.__setattr__(self, "per_player", eps)

    @classmethod
    def uniform(cls, eps: float, num_players: int) -> "StepSizes":
        return cls(np.full(num_players, float(eps)))

    def __repr__(self) -> str:
        return f"StepSizes({self.per_player.tolist()})"

    def __eq__(self, other):
        return isinstance(other, StepSizes) and np.array_equal(self.per_player, other.per_player)


def as_step_sizes(eps, num_players: int) -> StepSizes:
    if isinstance(eps, StepSizes):
        out = eps
    elif np.ndim(eps) == 0:
        out = StepSizes.uniform(float(eps), num_players)
    else:
        out = StepSizes(eps)
    if out.per_player.size != num_players:
        raise InputError(f"need {num_players} step sizes, got {out.per_player.size}")
    return out


# -- single steps -------------------------------------------------------------


def mwu_map(x: np.ndarray, obj, eps) -> np.ndarray:
    """MWU update on a raw ``N x M`` array; also defined off the simplex.

    ``x'_ij = x_ij (1 + eps_i g_ij) / (1 + eps_i sum_s x_is g_is)``.
    """
    x = np.asarray(x, dtype=float)
    e = as_step_sizes(eps, x.shape[0]).per_player[:, None]
    g = obj.gradient(x)
    num = 1.0 + e * g
    den = 1.0 + e * np.sum(x * g, axis=1, keepdims=True)
    if np.any(num <= 0.0) or np.any(den <= 0.0):
        raise StepSizeTooLargeError(
            f"MWU factors not positive (min numerator {num.min():.3g}, min denominator {den.min():.3g})"
        )
    return x * num / den


def mwu_step(x: StrategyProfile, obj, eps) -> StrategyProfile:
    return StrategyProfile(x.shape, mwu_map(_values(obj, x), obj, eps))


def baum_eagon_map(x: np.ndarray, obj) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    weighted = x * obj.gradient(x)
    den = weighted.sum(axis=1, keepdims=True)
    if np.any(den <= 0.0):
        raise ZeroDenominatorError("Baum-Eagon renormalisation sum is not positive")
    return weighted / den


def baum_eagon_step(x: StrategyProfile, p) -> StrategyProfile:
    """One Baum-Eagon step for a polynomial with nonnegative coefficients."""
    if isinstance(p, SparsePolynomial) and not p.nonneg_coefficients():
        raise InputError("Baum-Eagon steps need a polynomial with nonnegative coefficients")
    return StrategyProfile(x.shape, baum_eagon_map(_values(p, x), p))


def rational_be_step(x: StrategyProfile, r: RationalObjective) -> StrategyProfile:
    """Baum-Eagon step of the surrogate anchored at ``x``; never decreases ``r``."""
    return baum_eagon_step(x, build_surrogate(r, x))


class Method(str, enum.Enum):
    MWU = "mwu"
    BAUM_EAGON = "baum-eagon"
    RATIONAL_BE = "rational-be"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    STEP_FAILURE = "step-failure"


@dataclass
class Trajectory:
    points: list[StrategyProfile]
    objective_values: list[float]
    status: Status
    iterations: int
    steps: list[int] = field(default_factory=list)
    final_gap: float = float("nan")
    failure: str | None = None
    failed_iteration: int | None = None

    @property
    def final(self) -> StrategyProfile:
        return self.points[-1]

    def to_dict(self) -> dict:
        out = {
            "status": self.status.value,
            "iterations": self.iterations,
            "final_gap": self.final_gap,
            "steps": list(self.steps),
            "points": [p.values.tolist() for p in self.points],
            "values": list(self.objective_values),
        }
        if self.failure is not None:
            out["failure"] = self.failure
            out["failed_iteration"] = self.failed_iteration
        return out

    def to_csv(self) -> str:
        shape = self.points[0].shape
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = [f"x_{i + 1}_{j + 1}" for i in range(shape.n) for j in range(shape.m)]
        writer.writerow(["t", *cols, "P"])
        for t, p, v in zip(self.steps, self.points, self.objective_values):
            writer.writerow([t, *(repr(float(c)) for c in p.flat), repr(float(v))])
        return buf.getvalue()


def _renormalised(x: np.ndarray) -> np.ndarray:
    # keeps long runs on D; a single step only drifts by rounding
    return x / x.sum(axis=1, keepdims=True)


def run(
    x0: StrategyProfile,
    obj,
    eps=None,
    method: Method | str = Method.MWU,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    record_every: int | None = None,
) -> Trajectory:
    """Iterate until consecutive iterates are within ``tol`` in the max norm."""
    method = Method(method)
    if tol <= 0 or max_iter < 1:
        raise InputError("need tol > 0 and max_iter >= 1")
    if record_every is None:
        record_every = 1 if max_iter <= 10_000 else 100
    if method is Method.MWU:
        eps = as_step_sizes(EPS_CAP if eps is None else eps, x0.shape.n)
        step = lambda x: mwu_map(x, obj, eps)  # noqa: E731
    elif method is Method.BAUM_EAGON:
        if not isinstance(obj, SparsePolynomial) or not obj.nonneg_coefficients():
            raise InputError("the Baum-Eagon method needs a polynomial with nonnegative coefficients")
        step = lambda x: baum_eagon_map(x, obj)  # noqa: E731
    else:
        if not isinstance(obj, RationalObjective):
            raise InputError("the rational Baum-Eagon method needs a rational objective")
        step = lambda x: baum_eagon_map(x, build_surrogate(obj, StrategyProfile(x0.shape, x)))  # noqa: E731

    x = _values(obj, x0)
    points, values, steps = [x0], [float(obj.value(x))], [0]
    status, gap, failure, failed_at = Status.MAX_ITERATIONS, float("nan"), None, None
    t = 0
    while t < max_iter:
        try:
            nxt = _renormalised(step(x))
        except MWUError as exc:
            status, failure, failed_at = Status.STEP_FAILURE, f"{type(exc).__name__}: {exc}", t
            break
        t += 1
        gap = float(np.max(np.abs(nxt - x)))
        x = nxt
        done = gap <= tol
        if done or t % record_every == 0 or t == max_iter:
            points.append(StrategyProfile(x0.shape, x))
            values.append(float(obj.value(x)))
            steps.append(t)
        if done:
            status = Status.CONVERGED
            break
    return Trajectory(points, values, status, t, steps, gap, failure, failed_at)


# -- step-size heuristics ---------------------------------------------------


def safe_stepsize(obj, shape=None, samples: int = 1000, seed: int = 0, cap: float = EPS_CAP,
                  max_vertices: int = 4096) -> StepSizes:
    """``eps = 1 / (2 G)`` with ``G`` the largest sampled gradient entry in absolute value.

    Samples interior points plus every vertex (when there are at most
    ``max_vertices``).  At all sampled points this keeps every MWU numerator
    and denominator at least 1/2.  ``G = 0`` gives the cap.
    """
    shape = as_shape(obj.shape if shape is None else shape)
    if samples < 1:
        raise InputError("samples must be at least 1")
    points = [p.values for p in random_profiles(shape, samples, seed)]
    if shape.m ** shape.n <= max_vertices:
        points += list(shape.vertices())
    g_max = max(float(np.max(np.abs(obj.gradient(p)))) for p in points)
    eps = cap if g_max == 0.0 else min(cap, 1.0 / (2.0 * g_max))
    return StepSizes.uniform(eps, shape.n)
