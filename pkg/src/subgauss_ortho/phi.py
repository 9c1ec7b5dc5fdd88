"""Parameters of the phi-sub-Gaussian space and the reliability/accuracy test.

The Orlicz function is ``phi(t) = t^2/gamma`` for ``|t| < 1`` and
``|t|^gamma/gamma`` otherwise, with ``gamma > 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _check_gamma(gamma: float) -> None:
    if not gamma > 2:
        raise DomainError("gamma must exceed 2")


def phi_value(gamma: float, t):
    _check_gamma(gamma)
    a = np.abs(np.asarray(t, dtype=float))
    v = np.where(a < 1, a * a / gamma, a**gamma / gamma)
    return v if v.ndim else float(v)


def conjugate_exponent(gamma: float) -> float:
    """beta with 1/beta + 1/gamma = 1."""
    _check_gamma(gamma)
    return gamma / (gamma - 1)


def gaussian_tau(gamma: float) -> float:
    """phi-norm of a standard normal variable: sqrt(gamma / 2).

    exp(x^2/2) <= exp(phi(x tau)) holds for every x exactly when
    tau^2 >= gamma/2 (the binding case is |x tau| <= 1). The same value bounds
    the phi-norm of the unit-variance uniform law, whose moment generating
    function is dominated by exp(x^2/2).
    """
    _check_gamma(gamma)
    return math.sqrt(gamma / 2)


@dataclass(frozen=True)
class PhiParams:
    """gamma, norm scale tau and decay ratio omega of tau_phi(xi_k) = tau omega^k.

    ``omega = 1`` (constant norms) is admitted for the general and
    Hermite-tail bounds; the generating-function bounds require ``omega < 1``.
    """

    gamma: float
    tau: float
    omega: float

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not self.tau > 0:
            raise DomainError("tau must be positive")
        if not 0 < self.omega <= 1:
            raise DomainError("omega must lie in (0,1]")

    @property
    def beta(self) -> float:
        return conjugate_exponent(self.gamma)


@dataclass(frozen=True)
class AccuracySpec:
    p: float
    delta: float
    alpha: float

    def __post_init__(self):
        if not self.p >= 1:
            raise DomainError("p must be >= 1")
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0,1)")


def xi_norm(k, phi: PhiParams):
    """tau_phi(xi_k) = tau * omega^k."""
    return phi.tau * np.power(phi.omega, k) if np.ndim(k) else phi.tau * phi.omega**k


def threshold_reliability(acc: AccuracySpec, phi: PhiParams) -> float:
    """delta / (beta ln(2/alpha))^(p/beta)."""
    if acc.alpha >= 2:
        raise DomainError("alpha must be below 2")
    beta = phi.beta
    return acc.delta / (beta * math.log(2 / acc.alpha)) ** (acc.p / beta)


def threshold_accuracy(acc: AccuracySpec, phi: PhiParams) -> float:
    """delta / p^(p (1 - 1/gamma))."""
    return acc.delta / acc.p ** (acc.p * (1 - 1 / phi.gamma))


@dataclass(frozen=True)
class ConditionCheck:
    passed: bool
    margin: float
    threshold_reliability: float
    threshold_accuracy: float


def check_conditions(c_n: float, acc: AccuracySpec, phi: PhiParams) -> ConditionCheck:
    """Both threshold conditions: ``c_n <= rel`` (non-strict) and ``c_n < acc`` (strict)."""
    if c_n < 0:
        raise ValueError("c_n must be non-negative")
    rel = threshold_reliability(acc, phi)
    accu = threshold_accuracy(acc, phi)
    return ConditionCheck(
        passed=(c_n <= rel) and (c_n < accu),
        margin=min(rel, accu) - c_n,
        threshold_reliability=rel,
        threshold_accuracy=accu,
    )
