"""Monte Carlo validation of a truncated model.

Random variables xi_k come from a counter-based stream: the value for
``(seed, path, k)`` is the k-th 64-bit word of Philox keyed by
``(seed, path)``, so any path can be regenerated independently of the others
and of the order of evaluation.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .basis import BasisId
from .expansion import CoefficientTable
from .numerics import lp_norm_on_grid
from .phi import AccuracySpec

log = logging.getLogger(__name__)

DISTRIBUTIONS = ("standard-normal", "scaled-uniform")
THREADS_ENV = "SUBGAUSS_ORTHO_THREADS"
_CHUNK = 512
_SQRT3 = math.sqrt(3.0)


def worker_count() -> int:
    try:
        cap = int(os.environ.get(THREADS_ENV, "0"))
    except ValueError:
        cap = 0
    n = os.cpu_count() or 1
    return max(1, min(n, cap) if cap > 0 else min(n, 4))


@dataclass(frozen=True)
class SimConfig:
    seed: int
    paths: int
    n_model: int
    n_ref: int | None = None
    distribution: str = "standard-normal"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.n_model < 0:
            raise ValueError("n_model must be non-negative")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if self.n_ref is None:
            object.__setattr__(self, "n_ref", default_n_ref(self.n_model))
        if not self.n_model <= self.n_ref:
            raise ValueError("n_ref must not be below n_model")

    def check_table(self, table: CoefficientTable) -> None:
        if self.n_ref > table.n_max:
            raise ValueError(f"n_ref={self.n_ref} exceeds the table order n_max={table.n_max}")


def default_n_ref(n_model: int) -> int:
    return 4 * n_model + 64


def _key(seed: int, path: int) -> np.ndarray:
    return np.array([seed, path], dtype=np.uint64)


def _uniforms(words: np.ndarray) -> np.ndarray:
    # 53 random bits, centred in their cell: strictly inside (0, 1)
    return ((words >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53


def _transform(u: np.ndarray, distribution: str) -> np.ndarray:
    if distribution == "standard-normal":
        return ndtri(u)
    return (2.0 * u - 1.0) * _SQRT3


def draw_xi_block(seed: int, path: int, n: int, distribution: str = "standard-normal") -> np.ndarray:
    """xi_0 .. xi_{n-1} for one path."""
    words = np.random.Philox(key=_key(seed, path)).random_raw(n)
    return _transform(_uniforms(np.asarray(words, dtype=np.uint64)), distribution)


def draw_xi(seed: int, path: int, k: int, distribution: str = "standard-normal") -> float:
    """xi_k of one path, by random access into the path's stream."""
    bg = np.random.Philox(key=_key(seed, path))
    bg.advance(k // 4)
    word = np.asarray(bg.random_raw(4), dtype=np.uint64)[k % 4 : k % 4 + 1]
    return float(_transform(_uniforms(word), distribution)[0])


def _draw_matrix(sim: SimConfig, paths: range, n: int) -> np.ndarray:
    return np.stack([draw_xi_block(sim.seed, i, n, sim.distribution) for i in paths])


def sample_paths(table: CoefficientTable, sim: SimConfig, which: str = "truth") -> np.ndarray:
    """Path values on the table grid, shape ``(paths, n_t)``.

    ``truth`` sums xi_k a_k(t) over k <= n_ref; ``model`` sums xi_k ahat_k(t)
    over k <= n_model. Both use the same draws for a given path.
    """
    sim.check_table(table)
    if which == "truth":
        coef = table.a[: sim.n_ref + 1]
    elif which == "model":
        coef = table.a_hat[: sim.n_model + 1]
    else:
        raise ValueError("which must be 'truth' or 'model'")
    xi = _draw_matrix(sim, range(sim.paths), sim.n_ref + 1)
    return xi[:, : coef.shape[0]] @ coef


def error_coefficients(table: CoefficientTable, n_model: int, n_ref: int) -> np.ndarray:
    """Rows c_k with X - X_N = sum_k xi_k c_k(t): a - ahat up to n_model, then a."""
    diff = table.a[: n_ref + 1].copy()
    diff[: n_model + 1] -= table.a_hat[: n_model + 1]
    return diff


@dataclass(frozen=True)
class ReliabilityEstimate:
    exceed_fraction: float
    std_error: float
    alpha_target: float
    verdict: str
    paths: int
    per_path_errors: np.ndarray | None = None
    neglected_tail: float = 0.0


def verdict_for(q: float, se: float, alpha: float, paths: int) -> str:
    if q <= alpha + 3 * se:
        return "conservative"
    # too few paths to resolve the target probability at all
    if paths * alpha < 1:
        return "inconclusive"
    return "violated"


def path_errors(table: CoefficientTable, sim: SimConfig, p: float) -> np.ndarray:
    """L_p(0, T) norm of X - X_N for every path, in path order."""
    sim.check_table(table)
    coef = error_coefficients(table, sim.n_model, sim.n_ref)
    chunks = [range(lo, min(lo + _CHUNK, sim.paths)) for lo in range(0, sim.paths, _CHUNK)]

    def work(chunk):
        xi = _draw_matrix(sim, chunk, sim.n_ref + 1)
        return lp_norm_on_grid(xi @ coef, table.t_grid, p)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        parts = list(pool.map(work, chunks))
    return np.concatenate(parts)


def neglected_tail_estimate(table: CoefficientTable, n_ref: int, p: float) -> float:
    """L_p size of the standard deviation of the terms beyond n_ref (Hermite: Parseval defect)."""
    if table.basis is BasisId.HERMITE:
        defect = np.maximum(table.f_norm_sq - np.sum(table.a[: n_ref + 1] ** 2, axis=0), 0.0)
    else:
        defect = np.sum(table.a[n_ref + 1 :] ** 2, axis=0)
    return float(lp_norm_on_grid(np.sqrt(defect), table.t_grid, p))


def estimate_reliability(table: CoefficientTable, sim: SimConfig, acc: AccuracySpec,
                         keep_paths: bool = False) -> ReliabilityEstimate:
    """Fraction of paths with ||X - X_N||_p > delta, and the verdict against alpha."""
    errors = path_errors(table, sim, acc.p)
    q = float(np.count_nonzero(errors > acc.delta)) / sim.paths
    se = math.sqrt(q * (1 - q) / sim.paths)
    tail = neglected_tail_estimate(table, sim.n_ref, acc.p)
    log.info("neglected tail beyond n_ref=%d: L_p size %.3e", sim.n_ref, tail)
    return ReliabilityEstimate(
        exceed_fraction=q,
        std_error=se,
        alpha_target=acc.alpha,
        verdict=verdict_for(q, se, acc.alpha, sim.paths),
        paths=sim.paths,
        per_path_errors=errors if keep_paths else None,
        neglected_tail=tail,
    )
