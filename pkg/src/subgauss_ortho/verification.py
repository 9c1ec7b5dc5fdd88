"""Self-checks of the basis module: orthonormality, generating functions, integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import (
    BasisId,
    chebyshev_t_all,
    dt_factor,
    dt_factor_paper,
    gf_cheb1,
    gf_cheb2,
    gf_cheb2_energy,
    gf_series,
    gram_matrix,
    mehler_gf,
)
from .numerics import QuadSpec

OMEGAS = tuple(round(0.1 * i, 1) for i in range(1, 10))
HERMITE_LAMBDAS = np.linspace(-3.0, 3.0, 21)
CHEB_LAMBDAS = np.linspace(-1.0, 1.0, 21)


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float
    passed: bool


def _result(name, dev, tol, strict=True):
    dev = float(dev)
    return CheckResult(name, dev, float(tol), bool(dev <= tol) if strict else True)


def gram_deviation(basis: BasisId, K: int, q: QuadSpec) -> float:
    return float(np.max(np.abs(gram_matrix(basis, K, q) - np.eye(K))))


def gf_deviation(basis: BasisId, omegas=OMEGAS) -> float:
    """Largest |closed form - series| over the (lambda, omega) grid."""
    if basis is BasisId.HERMITE:
        lams, closed, kind = HERMITE_LAMBDAS, mehler_gf, "squared-normalized"
    else:
        lams, kind = CHEB_LAMBDAS, "plain"
        closed = gf_cheb1 if basis is BasisId.CHEBYSHEV_FIRST else gf_cheb2
    worst = 0.0
    for w in omegas:
        for x in lams:
            s, _ = gf_series(basis, float(x), w, kind)
            worst = max(worst, abs(closed(float(x), w) - s))
    return worst


def cheb2_energy_deviation(q: QuadSpec) -> float:
    """Relative gap of the squared U generating-function integral to 2/(1-w^2)^2."""
    return max(abs(gf_cheb2_energy(w, q) / (2.0 / (1 - w * w) ** 2) - 1) for w in OMEGAS)


def dt_factor_consistency(q_fine: QuadSpec, q_coarse: QuadSpec) -> float:
    return max(abs(dt_factor(w, q_coarse) / dt_factor(w, q_fine) - 1) for w in OMEGAS)


def dt_factor_printed_gap(q: QuadSpec) -> float:
    """Largest relative gap of the printed D_T expression to quadrature (reported only)."""
    return max(abs(dt_factor_paper(w) / dt_factor(w, q) - 1) for w in OMEGAS)


def chebyshev_trig_deviation(k_max: int = 100) -> float:
    x = np.linspace(-1.0, 1.0, 101)
    t = chebyshev_t_all(k_max, x)
    exact = np.cos(np.arange(k_max + 1)[:, None] * np.arccos(x)[None, :])
    return float(np.max(np.abs(t - exact)))


def run_basis_checks(q: QuadSpec = QuadSpec()) -> list[CheckResult]:
    """All basis checks. Tolerance gates never drop below the quadrature tolerance."""
    rel = q.rel_tol
    fine = QuadSpec(rel_tol=1e-12, abs_tol=1e-15, truncation_radius=q.truncation_radius)
    coarse = q.with_tol(max(rel, 1e-8), max(q.abs_tol, 1e-13))
    return [
        _result("gram_hermite_30", gram_deviation(BasisId.HERMITE, 30, q), max(1e-7, rel)),
        _result("gram_cheb1_16", gram_deviation(BasisId.CHEBYSHEV_FIRST, 16, q), max(1e-8, rel)),
        _result("gram_cheb2_16", gram_deviation(BasisId.CHEBYSHEV_SECOND, 16, q), max(1e-8, rel)),
        _result("gf_mehler", gf_deviation(BasisId.HERMITE), 1e-9),
        _result("gf_cheb1", gf_deviation(BasisId.CHEBYSHEV_FIRST), 1e-9),
        _result("gf_cheb2", gf_deviation(BasisId.CHEBYSHEV_SECOND), 1e-9),
        _result("chebyshev_trig_form", chebyshev_trig_deviation(), 1e-10),
        _result("cheb2_energy_closed_form", cheb2_energy_deviation(q), max(1e-9, rel)),
        _result("dt_factor_self_consistency", dt_factor_consistency(fine, coarse), max(1e-9, rel)),
        _result("dt_factor_printed_gap", dt_factor_printed_gap(q), math.inf, strict=False),
    ]
