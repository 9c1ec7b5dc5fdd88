"""Truncated orthogonal-series models of phi-sub-Gaussian processes.

Coefficients of a kernel f(t, lam) in Hermite or Chebyshev bases, error
functionals c_N for the truncated series, calibration of the truncation
order against an accuracy/reliability target, and Monte Carlo validation.
"""

__version__ = "0.1.0"

from .basis import BasisId
from .bounds import BoundMethod, BoundReport, calibrate, evaluate
from .config import RunConfig, load_config
from .errors import (
    DomainError,
    IndexTooLarge,
    Infeasible,
    NonConvergent,
    ParseError,
    SubgaussOrthoError,
    TailNotNegligible,
    TailTooHeavy,
    UnknownKernel,
    ValidationError,
)
from .expansion import ApproxScheme, CoefficientTable, KernelSpec, build_table
from .montecarlo import SimConfig, estimate_reliability
from .numerics import QuadSpec, TimeGrid
from .phi import AccuracySpec, PhiParams

__all__ = [
    "AccuracySpec", "ApproxScheme", "BasisId", "BoundMethod", "BoundReport", "CoefficientTable",
    "DomainError", "IndexTooLarge", "Infeasible", "KernelSpec", "NonConvergent", "ParseError",
    "PhiParams", "QuadSpec", "RunConfig", "SimConfig", "SubgaussOrthoError", "TailNotNegligible",
    "TailTooHeavy", "TimeGrid", "UnknownKernel", "ValidationError", "build_table", "calibrate",
    "estimate_reliability", "evaluate", "load_config", "__version__",
]
