"""Reproducible experiments: the Baum-Eagon counterexample, the
``cos(8x) sin(6y)`` demo map, and basin-of-attraction statistics.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .builtins import counterexample as counterexample_polynomial, trig_demo
from .dynamics import Method, Status, as_step_sizes, run, safe_stepsize
from .dynamics import baum_eagon_step
from .errors import InputError, StepSizeTooLargeError, WitnessNotFoundError
from .objective import load_objective
from .simplex import StrategyProfile, as_shape, random_profiles, snap, validate
from .stationarity import Tolerances, Verdict, classify

# -- Baum-Eagon counterexample ------------------------------------------------


def k_ratio(x1):
    """``x1 dP/dx1 / x2 dP/dx2`` for ``P = x1 + x1^7 x2 + x2^7`` with ``x2 = 1 - x1``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = 1.0 - x1
    return (x1 + 7.0 * x1**7 * x2) / (x1**7 * x2 + 7.0 * x2**7)


_COUNTEREXAMPLE = counterexample_polynomial()


def tau(x1: float) -> float:
    """First coordinate of one Baum-Eagon step of the counterexample polynomial."""
    p = StrategyProfile((1, 2), [[x1, 1.0 - x1]])
    return float(baum_eagon_step(p, _COUNTEREXAMPLE).values[0, 0])


@dataclass
class CounterexampleResult:
    grid: np.ndarray
    k: np.ndarray
    triple: tuple[float, float, float]
    witness: tuple[float, float]
    witness_gap: float

    def to_dict(self) -> dict:
        return {
            "grid_size": int(self.grid.size),
            "triple": {"x": list(self.triple), "k": k_ratio(np.array(self.triple)).tolist()},
            "witness": {"x": list(self.witness), "tau": [tau(v) for v in self.witness], "gap": self.witness_gap},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x1", "k"])
        for a, b in zip(self.grid, self.k):
            writer.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()


def counterexample(grid_size: int = 10_000) -> CounterexampleResult:
    """Non-monotone ``k`` and two distinct points with equal Baum-Eagon image."""
    if grid_size < 100:
        raise InputError("grid_size must be at least 100")
    x = (np.arange(grid_size) + 0.5) / grid_size
    k = k_ratio(x)
    drops = np.flatnonzero(np.diff(k) < 0)
    if drops.size == 0:
        raise WitnessNotFoundError("k is monotone on this grid")
    peak = int(drops[0])
    rises = np.flatnonzero(np.diff(k[peak:]) > 0)
    if rises.size == 0:
        raise WitnessNotFoundError("k never rises again after its first drop")
    valley = peak + int(rises[0])
    last = grid_size - 1
    if not k[valley] < k[last]:
        raise WitnessNotFoundError("no grid point beyond the valley exceeds it")
    triple = (float(x[peak]), float(x[valley]), float(x[last]))

    # tau is increasing before the peak and decreasing after it: a level between
    # tau(valley) and tau(peak) is crossed once on each side
    level = 0.5 * (tau(x[peak]) + tau(x[valley]))
    f = lambda v: tau(v) - level  # noqa: E731
    left = bisect(f, float(x[0]), float(x[peak]), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    right = bisect(f, float(x[peak]), float(x[valley]), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    gap = abs(tau(left) - tau(right))
    if abs(left - right) <= 1e-3 or gap > 1e-10:
        raise WitnessNotFoundError(f"bisection ended with |dx| = {abs(left - right):.3g}, gap {gap:.3g}")
    return CounterexampleResult(x, k, triple, (float(left), float(right)), float(gap))


# -- cos(8x) sin(6y) demo -------------------------------------------------------

TRIG_MAXIMIZERS = np.array([[0.0, np.pi / 12], [np.pi / 4, np.pi / 12], [np.pi / 8, np.pi / 4]])


def _demo_factors(x, y, eps):
    gx = -8.0 * np.sin(8 * x) * np.sin(6 * y)
    gy = 6.0 * np.cos(8 * x) * np.cos(6 * y)
    num_x = 1 + eps * gx
    den_x = 1 + eps * x * gx + eps * (1 - x) * (-gx)
    num_y = 1 + eps * gy
    den_y = 1 + eps * y * gy + eps * (1 - y) * (-gy)
    return num_x, den_x, num_y, den_y


def demo_step(x, y, eps: float):
    """One step of the two-variable MWU map for ``cos(8x) sin(6y)``; vectorised."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    num_x, den_x, num_y, den_y = _demo_factors(x, y, eps)
    if min(np.min(num_x), np.min(den_x), np.min(num_y), np.min(den_y)) <= 0:
        raise StepSizeTooLargeError(f"eps = {eps} makes a demo factor non-positive")
    return x * num_x / den_x, y * num_y / den_y


def vector_field(grid: int = 50, eps: float = 0.05) -> np.ndarray:
    """Rows ``(x, y, dx, dy)`` of the displacement ``T(x, y) - (x, y)`` on a cell-centred grid."""
    if grid < 2:
        raise InputError("grid must be at least 2")
    if not eps > 0:
        raise InputError("eps must be positive")
    ticks = (np.arange(grid) + 0.5) / grid
    xs, ys = np.meshgrid(ticks, ticks, indexing="ij")
    xs, ys = xs.reshape(-1), ys.reshape(-1)
    nx, ny = demo_step(xs, ys, eps)
    return np.column_stack([xs, ys, nx - xs, ny - ys])


def field_to_csv(rows: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y", "dx", "dy"])
    for r in rows:
        writer.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def run_demo(x0, y0, eps: float = 0.05, tol: float = 1e-10, max_iter: int = 100_000):
    """Iterate the demo map from many starts at once.

    The complements ``1 - x`` and ``1 - y`` are carried as separate state
    (they obey the same update with the opposite drive), otherwise they round
    to exactly zero near the far edges and freeze runs on a face.  Each start
    stops once its step is within ``tol``; returns final ``x``, ``y``, a
    converged mask and per-start iteration counts.
    """
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    xc, yc = 1.0 - x, 1.0 - y
    active = np.ones(x.shape, dtype=bool)
    iters = np.zeros(x.shape, dtype=int)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if not idx.size:
            break
        a, b, ac, bc = x[idx], y[idx], xc[idx], yc[idx]
        num_x, den_x, num_y, den_y = _demo_factors(a, b, eps)
        if min(num_x.min(), den_x.min(), num_y.min(), den_y.min(), (2 - num_x).min(), (2 - num_y).min()) <= 0:
            raise StepSizeTooLargeError(f"eps = {eps} makes a demo factor non-positive")
        na, nb = a * num_x / den_x, b * num_y / den_y
        nac, nbc = ac * (2 - num_x) / den_x, bc * (2 - num_y) / den_y
        sx, sy = na + nac, nb + nbc
        na, nac, nb, nbc = na / sx, nac / sx, nb / sy, nbc / sy
        gap = np.maximum(np.abs(na - a), np.abs(nb - b))
        x[idx], y[idx], xc[idx], yc[idx] = na, nb, nac, nbc
        iters[idx] += 1
        active[idx[gap <= tol]] = False
    return x, y, ~active, iters, xc, yc


# -- basin statistics -----------------------------------------------------------


@dataclass
class BasinSummary:
    total_runs: int
    converged: int
    cluster_centers: list[StrategyProfile]
    cluster_counts: list[int]
    cluster_verdicts: list[Verdict]
    fraction_second_order: float
    endpoints: list[StrategyProfile] = field(default_factory=list, repr=False)
    failures: int = 0

    def to_dict(self) -> dict:
        return {
            "total_runs": self.total_runs,
            "converged": self.converged,
            "failures": self.failures,
            "fraction_second_order": self.fraction_second_order,
            "clusters": [
                {"center": c.to_dict(), "count": n, "verdict": v.value}
                for c, n, v in zip(self.cluster_centers, self.cluster_counts, self.cluster_verdicts)
            ],
        }


def cluster(points: list[np.ndarray], radius: float) -> list[list[int]]:
    """Greedy max-norm clustering in lexicographic order; deterministic."""
    order = sorted(range(len(points)), key=lambda k: tuple(points[k].reshape(-1)))
    groups: list[list[int]] = []
    centers: list[np.ndarray] = []
    for k in order:
        for g, c in zip(groups, centers):
            if np.max(np.abs(points[k] - c)) <= radius:
                g.append(k)
                break
        else:
            groups.append([k])
            centers.append(points[k])
    return groups


def summarize_basin(endpoints: list[np.ndarray], total: int, obj, radius: float,
                    tols: Tolerances, failures: int = 0) -> BasinSummary:
    groups = cluster(endpoints, radius)
    # classify the limit point: coordinates below the clustering resolution are zero
    centers = [snap(validate(np.mean([endpoints[k] for k in g], axis=0)), radius) for g in groups]
    ordered = sorted(zip(centers, groups), key=lambda cg: tuple(cg[0].flat))
    centers = [c for c, _ in ordered]
    counts = [len(g) for _, g in ordered]
    verdicts = [classify(c, obj, tols) for c in centers]
    good = sum(n for n, v in zip(counts, verdicts) if v is Verdict.SECOND_ORDER)
    converged = len(endpoints)
    return BasinSummary(
        total_runs=total,
        converged=converged,
        cluster_centers=centers,
        cluster_counts=counts,
        cluster_verdicts=verdicts,
        fraction_second_order=good / converged if converged else 0.0,
        endpoints=[validate(e) for e in endpoints],
        failures=failures,
    )


def basin(objective, eps=None, starts: int = 500, seed: int = 0, tol: float = 1e-10,
          max_iter: int = 100_000, cluster_radius: float = 1e-4,
          tols: Tolerances | None = None) -> BasinSummary:
    """Run MWU from random interior starts and classify where it ends up.

    ``objective`` is an objective or a source string for
    :func:`~mwuopt.objective.load_objective`; the ``trig-demo`` id runs the
    dedicated two-variable demo map.  Cluster
    centres are classified with ``support_tol = cluster_radius``: endpoints
    approach degenerate boundary equilibria only sublinearly, so coordinates
    below the clustering resolution count as zero.
    """
    if starts < 1:
        raise InputError("starts must be at least 1")
    if tols is None:
        tols = Tolerances(support_tol=cluster_radius)
    if objective == "trig-demo":
        obj = trig_demo()
        eps = 0.05 if eps is None else float(np.ravel(eps)[0])
        profiles = random_profiles(obj.shape, starts, seed)
        x0 = np.array([p.values[0, 0] for p in profiles])
        y0 = np.array([p.values[1, 0] for p in profiles])
        x, y, done, _, xc, yc = run_demo(x0, y0, eps, tol, max_iter)
        ends = [np.array([[a, ac], [b, bc]]) for a, ac, b, bc in zip(x[done], xc[done], y[done], yc[done])]
        return summarize_basin(ends, starts, obj, cluster_radius, tols)

    obj = load_objective(objective) if isinstance(objective, str) else objective
    shape = as_shape(obj.shape)
    step = safe_stepsize(obj) if eps is None else as_step_sizes(eps, shape.n)
    ends, failures = [], 0
    for p in random_profiles(shape, starts, seed):
        traj = run(p, obj, step, Method.MWU, tol, max_iter, record_every=max_iter)
        if traj.status is Status.CONVERGED:
            ends.append(traj.final.values)
        elif traj.status is Status.STEP_FAILURE:
            failures += 1
    return summarize_basin(ends, starts, obj, cluster_radius, tols, failures)
