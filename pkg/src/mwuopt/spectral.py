"""Jacobian of the MWU map, its projection to reduced coordinates, and spectra.

The analytic Jacobian differentiates the update
``T_ij = x_ij (1 + eps_i g_ij) / S_i`` with ``S_i = 1 + eps_i sum_j x_ij g_ij``
by the quotient rule.  Projection removes one positive coordinate per player
through ``x_{i,r} = 1 - sum_{j != r} x_ij`` so the result is the Jacobian of the
map in genuinely reduced coordinates.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .dynamics import StepSizes, as_step_sizes, mwu_map
from .errors import (
    EmptySupportRowError,
    HessianUnavailableError,
    NoConvergenceError,
    NotFixedPointError,
    NotInteriorFixedPointError,
    StepSizeTooLargeError,
)
from .objective import _values, has_hessian
from .simplex import SUPPORT_TOL, StrategyProfile, as_shape, random_profiles
from .stationarity import DEFAULT_TOLS, Tolerances

FIXED_POINT_TOL = 1e-8


def _player_denominators(x: np.ndarray, g: np.ndarray, eps: np.ndarray) -> np.ndarray:
    return 1.0 + eps * np.sum(x * g, axis=1)


def analytic_jacobian(x, obj, eps) -> np.ndarray:
    """``NM x NM`` Jacobian of the MWU update at ``x`` (need not lie on the simplex)."""
    x = _values(obj, x)
    n, m = x.shape
    e = as_step_sizes(eps, n).per_player
    if not has_hessian(obj):
        raise HessianUnavailableError("the MWU Jacobian needs a Hessian")
    g = obj.gradient(x)
    h = obj.hessian(x)
    s = _player_denominators(x, g, e)
    if np.any(s <= 0.0):
        raise StepSizeTooLargeError(f"player denominator {s.min():.3g} is not positive")
    xf, gf = x.reshape(-1), g.reshape(-1)
    player = np.repeat(np.arange(n), m)
    ef, sf = e[player], s[player]
    num = 1.0 + ef * gf
    # dS_i / dx_b = eps_i (delta_{i, player(b)} g_b + sum_j x_ij H_{ij, b})
    ds = (x[:, :, None] * h.reshape(n, m, n * m)).sum(axis=1)
    ds[player, np.arange(n * m)] += gf
    ds *= e[:, None]
    jac = np.diag(num / sf)
    jac += (xf * ef / sf)[:, None] * h
    jac -= (xf * num / sf**2)[:, None] * ds[player]
    return jac


def removed_coordinates(x: StrategyProfile, support_tol: float = SUPPORT_TOL) -> list[tuple[int, int]]:
    """Per player, the largest coordinate (lowest index on ties)."""
    vals = x.values
    if np.any(vals.max(axis=1) <= support_tol):
        raise EmptySupportRowError("a player has no coordinate above the support threshold")
    return [(i, int(np.argmax(vals[i]))) for i in range(vals.shape[0])]


def project_jacobian(full: np.ndarray, x: StrategyProfile, support_tol: float = SUPPORT_TOL):
    """Reduced-coordinate Jacobian and the ``(i, j)`` removed for each player."""
    n, m = x.shape.as_tuple()
    removed = removed_coordinates(x, support_tol)
    rem_flat = np.array([i * m + j for i, j in removed])
    keep = np.setdiff1d(np.arange(n * m), rem_flat)
    player = np.repeat(np.arange(n), m)
    folded = full - full[:, rem_flat[player]]
    return folded[np.ix_(keep, keep)], removed


def compact_form(x_star: StrategyProfile, obj, eps, support_tol: float = SUPPORT_TOL,
                 fixed_tol: float = FIXED_POINT_TOL) -> np.ndarray:
    """``I + D_xs (I - D_xx) H`` at an interior fixed point."""
    x = _values(obj, x_star)
    n, m = x.shape
    e = as_step_sizes(eps, n).per_player
    if np.any(x <= support_tol):
        raise NotInteriorFixedPointError("compact form needs an interior point")
    if np.max(np.abs(mwu_map(x, obj, e) - x)) > fixed_tol:
        raise NotInteriorFixedPointError("point is not a fixed point of the MWU update")
    g = obj.gradient(x)
    s = _player_denominators(x, g, e)
    player = np.repeat(np.arange(n), m)
    d_xs = np.diag(e[player] * x.reshape(-1) / s[player])
    d_xx = np.zeros((n * m, n * m))
    for i in range(n):
        d_xx[i * m:(i + 1) * m, i * m:(i + 1) * m] = x[i][None, :]
    eye = np.eye(n * m)
    return eye + d_xs @ (eye - d_xx) @ obj.hessian(x)


def _sort_key(z: complex):
    return (-abs(z), -z.real, -z.imag)


def spectrum(mat: np.ndarray) -> list[complex]:
    """Eigenvalues of a general real matrix, largest modulus first."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return []
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix has non-finite entries")
    try:
        vals = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from None
    return sorted((complex(v) for v in vals), key=_sort_key)


def spectral_radius(mat: np.ndarray) -> float:
    vals = spectrum(mat)
    return max((abs(v) for v in vals), default=0.0)


@dataclass(frozen=True, eq=False)
class JacobianBundle:
    point: StrategyProfile
    eps: StepSizes
    player_denominators: np.ndarray
    full: np.ndarray
    removed_indices: list[tuple[int, int]]
    projected: np.ndarray
    spectrum: list[complex]
    spectral_radius: float
    determinant_full: float

    @property
    def determinant_projected(self) -> float:
        return float(np.linalg.det(self.projected)) if self.projected.size else 1.0

    def to_dict(self) -> dict:
        return {
            "point": self.point.to_dict(),
            "eps": self.eps.per_player.tolist(),
            "player_denominators": self.player_denominators.tolist(),
            "removed_indices": [[i + 1, j + 1] for i, j in self.removed_indices],
            "spectrum": [[z.real, z.imag] for z in self.spectrum],
            "spectral_radius": self.spectral_radius,
            "determinant_full": self.determinant_full,
            "determinant_projected": self.determinant_projected,
        }


def jacobian_bundle(x: StrategyProfile, obj, eps, support_tol: float = SUPPORT_TOL) -> JacobianBundle:
    eps = as_step_sizes(eps, x.shape.n)
    vals = _values(obj, x)
    s = _player_denominators(vals, obj.gradient(vals), eps.per_player)
    full = analytic_jacobian(x, obj, eps)
    projected, removed = project_jacobian(full, x, support_tol)
    spec = spectrum(projected)
    return JacobianBundle(
        point=x,
        eps=eps,
        player_denominators=s,
        full=full,
        removed_indices=removed,
        projected=projected,
        spectrum=spec,
        spectral_radius=max((abs(z) for z in spec), default=0.0),
        determinant_full=float(np.linalg.det(full)),
    )


class Stability(str, enum.Enum):
    UNSTABLE = "unstable"
    NOT_UNSTABLE = "not-unstable"


@dataclass(frozen=True, eq=False)
class StabilityResult:
    verdict: Stability
    spectral_radius: float
    bundle: JacobianBundle

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "spectral_radius": self.spectral_radius, **self.bundle.to_dict()}


def fixed_point_gap(x: StrategyProfile, obj, eps) -> float:
    return float(np.max(np.abs(mwu_map(_values(obj, x), obj, eps) - x.values)))


def stability_verdict(x: StrategyProfile, obj, eps, tols: Tolerances = DEFAULT_TOLS,
                      fixed_tol: float = FIXED_POINT_TOL) -> StabilityResult:
    """Unstable iff the projected Jacobian has spectral radius above ``1 + eig_tol``."""
    gap = fixed_point_gap(x, obj, eps)
    if gap > fixed_tol:
        raise NotFixedPointError(f"MWU moves the point by {gap:.3g}")
    bundle = jacobian_bundle(x, obj, eps, tols.support_tol)
    rho = bundle.spectral_radius
    verdict = Stability.UNSTABLE if rho > 1.0 + tols.eig_tol else Stability.NOT_UNSTABLE
    return StabilityResult(verdict, rho, bundle)


# -- diffeomorphism probe -------------------------------------------------


def face_midpoints(shape) -> list[np.ndarray]:
    """For each coordinate, the uniform point of the facet where it vanishes."""
    shape = as_shape(shape)
    n, m = shape.as_tuple()
    out = []
    for i in range(n):
        for j in range(m):
            x = np.full((n, m), 1.0 / m)
            x[i] = 1.0 / (m - 1)
            x[i, j] = 0.0
            out.append(x)
    return out


@dataclass
class ProbeRow:
    eps: float
    min_det: float
    argmin_point_index: int
    failures: int


@dataclass
class ProbeResult:
    rows: list[ProbeRow]
    delta: float
    num_points: int
    failures: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "num_points": self.num_points,
            "delta": self.delta,
            "rows": [
                {"eps": r.eps, "min_det": r.min_det, "argmin_point_index": r.argmin_point_index, "failures": r.failures}
                for r in self.rows
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["eps", "min_det", "argmin_point_index"])
        for r in self.rows:
            writer.writerow([repr(r.eps), repr(r.min_det), r.argmin_point_index])
        return buf.getvalue()


DEFAULT_EPS_GRID = tuple(float(v) for v in np.geomspace(1e-6, 1.0, 25))


def diffeomorphism_probe(obj, shape=None, eps_grid=DEFAULT_EPS_GRID, sample_points: int = 200,
                         seed: int = 0, support_tol: float = SUPPORT_TOL) -> ProbeResult:
    """Minimum projected-Jacobian determinant per step size.

    ``delta`` is the largest grid value whose minimum exceeds 1/2 with no
    failed evaluations (0 when none qualifies).  Points where the Jacobian
    cannot be formed are counted in ``failures`` and skipped.
    """
    shape = as_shape(obj.shape if shape is None else shape)
    grid = [float(v) for v in eps_grid]
    if any(v <= 0 for v in grid) or grid != sorted(grid):
        raise ValueError("eps_grid must be positive and ascending")
    points = [p for p in random_profiles(shape, sample_points, seed)]
    points += [StrategyProfile(shape, f) for f in face_midpoints(shape)]
    rows, failures = [], {}
    for eps in grid:
        dets = np.full(len(points), np.nan)
        for k, p in enumerate(points):
            try:
                full = analytic_jacobian(p, obj, eps)
                # a non-positive MWU factor makes the map itself undefined here
                mwu_map(p.values, obj, eps)
            except (StepSizeTooLargeError, ArithmeticError) as exc:
                failures.setdefault(eps, []).append((k, type(exc).__name__))
                continue
            proj, _ = project_jacobian(full, p, support_tol)
            dets[k] = np.linalg.det(proj) if proj.size else 1.0
        ok = ~np.isnan(dets)
        if ok.any():
            idx = int(np.flatnonzero(ok)[np.argmin(dets[ok])])
            rows.append(ProbeRow(eps, float(dets[idx]), idx, int((~ok).sum())))
        else:
            rows.append(ProbeRow(eps, float("nan"), -1, len(points)))
    good = [r.eps for r in rows if r.failures == 0 and r.min_det > 0.5]
    return ProbeResult(rows, max(good, default=0.0), len(points), failures)
