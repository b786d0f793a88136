"""Multiplicative weights and Baum-Eagon ascent over products of simplices.

The package is organised around a few small modules:

- :mod:`mwuopt.simplex` validates points of the domain.
- :mod:`mwuopt.polynomial` and :mod:`mwuopt.objective` provide the objectives.
- :mod:`mwuopt.dynamics` implements the updates and trajectories.
- :mod:`mwuopt.stationarity` classifies points by their KKT conditions.
- :mod:`mwuopt.spectral` covers Jacobians, spectra and the stability verdict.
- :mod:`mwuopt.experiments` holds the reproducible experiments that the
  ``mwuopt`` command line exposes.
"""

from .dynamics import (
    Method,
    Status,
    StepSizes,
    Trajectory,
    baum_eagon_step,
    mwu_step,
    rational_be_step,
    run,
    safe_stepsize,
)
from .errors import InputError, MWUError, NumericalError
from .objective import (
    BlackBoxObjective,
    RationalObjective,
    SurrogatePolynomial,
    build_surrogate,
    evaluate,
    gradient,
    hessian,
    load_objective,
    parse_objective,
)
from .polynomial import Monomial, SparsePolynomial, parse_polynomial
from .simplex import DomainShape, StrategyProfile, SupportPattern, random_profile, support, validate
from .spectral import (
    JacobianBundle,
    Stability,
    analytic_jacobian,
    compact_form,
    diffeomorphism_probe,
    jacobian_bundle,
    project_jacobian,
    spectral_radius,
    spectrum,
    stability_verdict,
)
from .stationarity import KKTReport, Tolerances, Verdict, classify, classify_report

__version__ = "0.1.0"

__all__ = [
    "BlackBoxObjective",
    "DomainShape",
    "InputError",
    "JacobianBundle",
    "KKTReport",
    "MWUError",
    "Method",
    "Monomial",
    "NumericalError",
    "RationalObjective",
    "SparsePolynomial",
    "Stability",
    "Status",
    "StepSizes",
    "StrategyProfile",
    "SupportPattern",
    "SurrogatePolynomial",
    "Tolerances",
    "Trajectory",
    "Verdict",
    "analytic_jacobian",
    "baum_eagon_step",
    "build_surrogate",
    "classify",
    "classify_report",
    "compact_form",
    "diffeomorphism_probe",
    "evaluate",
    "gradient",
    "hessian",
    "jacobian_bundle",
    "load_objective",
    "mwu_step",
    "parse_objective",
    "parse_polynomial",
    "project_jacobian",
    "random_profile",
    "rational_be_step",
    "run",
    "safe_stepsize",
    "spectral_radius",
    "spectrum",
    "stability_verdict",
    "support",
    "validate",
]
