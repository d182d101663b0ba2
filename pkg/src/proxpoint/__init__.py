"""proxpoint: proximal point solvers under Holderian growth.

Modules:
    proxlib    closed-form proximal operators and projections
    core       problem/trace/config domain types
    envelope   Moreau-envelope analytics and distance certificates
    psgm       inner proximal subgradient routine with certified budgets
    ippa       outer inexact proximal point loop
    rippa      restarted loops and the composed subgradient solver
    rates      recurrence oracles and complexity predictors
    problems   benchmark problem zoo
    bench      experiment harness (CSV traces, summaries)
    cli        `bench` command-line entry point
"""

from .core import (
    CertifiedResult,
    EvalCounter,
    GrowthModel,
    ProblemInstance,
    RunTrace,
    SolverConfig,
    evaluate_objective,
)
from .errors import BudgetError, ContractError, NumericalError
from .proxlib import ProxSpec

__all__ = [
    "BudgetError",
    "CertifiedResult",
    "ContractError",
    "EvalCounter",
    "GrowthModel",
    "NumericalError",
    "ProblemInstance",
    "ProxSpec",
    "RunTrace",
    "SolverConfig",
    "evaluate_objective",
]

__version__ = "0.1.0"
