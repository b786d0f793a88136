"""First- and second-order KKT classification over a product of simplices."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import HessianUnavailableError, NoConvergenceError
from .objective import _values, has_hessian
from .simplex import StrategyProfile, SupportPattern, support


@dataclass(frozen=True)
class Tolerances:
    grad_tol: float = 1e-7
    support_tol: float = 1e-9
    eig_tol: float = 1e-8


DEFAULT_TOLS = Tolerances()


class Verdict(str, enum.Enum):
    NON_STATIONARY = "non-stationary"
    FIRST_ORDER_ONLY = "first-order-only"
    SECOND_ORDER = "second-order-stationary"


@dataclass(frozen=True, eq=False)
class KKTReport:
    point: StrategyProfile
    support: SupportPattern
    player_averages: np.ndarray
    first_order: bool
    strict: bool
    worst_violation: float
    tangent_dimension: int
    second_order: Optional[bool] = None
    max_tangent_eigenvalue: Optional[float] = None
    hessian_available: bool = True

    @property
    def verdict(self) -> Verdict:
        if not self.first_order:
            return Verdict.NON_STATIONARY
        if self.second_order:
            return Verdict.SECOND_ORDER
        return Verdict.FIRST_ORDER_ONLY

    def to_dict(self) -> dict:
        return {
            "point": self.point.to_dict(),
            "support": self.support.in_support.tolist(),
            "player_averages": self.player_averages.tolist(),
            "first_order": self.first_order,
            "strict": self.strict,
            "second_order": self.second_order,
            "worst_violation": self.worst_violation,
            "max_tangent_eigenvalue": self.max_tangent_eigenvalue,
            "tangent_dimension": self.tangent_dimension,
            "hessian_available": self.hessian_available,
            "verdict": self.verdict.value,
        }


def check_first_order(x: StrategyProfile, obj, grad_tol: float = DEFAULT_TOLS.grad_tol,
                      support_tol: float = DEFAULT_TOLS.support_tol) -> KKTReport:
    supp = support(x, support_tol)
    g = obj.gradient(_values(obj, x))
    avg = np.sum(x.values * g, axis=1)
    resid = g - avg[:, None]
    mask = supp.in_support
    on = np.abs(resid[mask])
    off = resid[~mask]
    worst = max(float(on.max(initial=0.0)), float(off.max(initial=0.0)))
    first = bool(np.all(on <= grad_tol) and np.all(off <= grad_tol))
    strict = first and bool(np.all(off < -grad_tol))
    return KKTReport(
        point=x,
        support=supp,
        player_averages=avg,
        first_order=first,
        strict=strict,
        worst_violation=worst,
        tangent_dimension=int(np.sum(supp.sizes - 1)),
    )


def tangent_basis(supp: SupportPattern) -> np.ndarray:
    """Orthonormal basis (rows) of the zero-sum directions inside the support."""
    n, m = supp.shape.as_tuple()
    rows = []
    for i in range(n):
        idx = np.flatnonzero(supp.in_support[i])
        if idx.size < 2:
            continue
        diffs = np.zeros((idx.size, idx.size - 1))
        diffs[0, :] = -1.0
        diffs[np.arange(1, idx.size), np.arange(idx.size - 1)] = 1.0
        q, _ = np.linalg.qr(diffs)
        for col in q.T:
            v = np.zeros(n * m)
            v[i * m + idx] = col
            rows.append(v)
    return np.array(rows).reshape(len(rows), n * m)


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = np.array(a, dtype=float)
    k = a.shape[0]
    if k == 0:
        return np.zeros(0)
    a = 0.5 * (a + a.T)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * rp - s * rq, s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * cp - s * cq, s * cp + c * cq
    raise NoConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def restricted_hessian(x: StrategyProfile, obj, support_tol: float = DEFAULT_TOLS.support_tol):
    basis = tangent_basis(support(x, support_tol))
    h = obj.hessian(_values(obj, x))
    return basis @ h @ basis.T


def check_second_order(x: StrategyProfile, obj, grad_tol: float = DEFAULT_TOLS.grad_tol,
                       support_tol: float = DEFAULT_TOLS.support_tol,
                       eig_tol: float = DEFAULT_TOLS.eig_tol) -> KKTReport:
    """Curvature of ``obj`` on the tangent space of the face containing ``x``.

    Raises :class:`HessianUnavailableError` for black boxes without a Hessian.
    """
    report = check_first_order(x, obj, grad_tol, support_tol)
    if not report.first_order:
        return _replace(report, second_order=False)
    if not has_hessian(obj):
        raise HessianUnavailableError("second-order check needs a Hessian")
    ht = restricted_hessian(x, obj, support_tol)
    if ht.shape[0] == 0:
        return _replace(report, second_order=True)
    lam = float(jacobi_eigenvalues(ht)[-1])
    return _replace(report, second_order=lam <= eig_tol, max_tangent_eigenvalue=lam)


def _replace(report: KKTReport, **changes) -> KKTReport:
    fields = {k: getattr(report, k) for k in report.__dataclass_fields__}
    fields.update(changes)
    return KKTReport(**fields)


def classify_report(x: StrategyProfile, obj, tols: Tolerances = DEFAULT_TOLS) -> KKTReport:
    """Full report; without a Hessian it stops at first order and clears ``hessian_available``."""
    try:
        return check_second_order(x, obj, tols.grad_tol, tols.support_tol, tols.eig_tol)
    except HessianUnavailableError:
        report = check_first_order(x, obj, tols.grad_tol, tols.support_tol)
        return _replace(report, hessian_available=False)


def classify(x: StrategyProfile, obj, tols: Tolerances = DEFAULT_TOLS) -> Verdict:
    return classify_report(x, obj, tols).verdict
