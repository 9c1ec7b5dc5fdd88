"""Orthonormal bases and their generating functions.

Hermite polynomials follow the probabilists' convention
``H_{k+1} = x H_k - k H_{k-1}``; the Hermite functions

    Hhat_k(x) = H_k(x) / sqrt(k!) * (2 pi)^(-1/4) * exp(-x^2 / 4)

are orthonormal in L2(R) under Lebesgue measure. Chebyshev functions carry
the uniform factor sqrt(2/pi); the Gram matrix uses the weighted inner
product with 1/sqrt(pi) for T_0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IndexTooLarge
from .numerics import QuadSpec, integrate_finite, integrate_real_line

HERMITE_POLY_MAX_INDEX = 400
HERMITE_FUNCTION_MAX_INDEX = 10_000
GRAM_MAX_SIZE = 64

_RESCALE = 1e100
_LOG_RESCALE = math.log(_RESCALE)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class BasisId(enum.Enum):
    HERMITE = "hermite"
    CHEBYSHEV_FIRST = "cheb1"
    CHEBYSHEV_SECOND = "cheb2"

    @property
    def support(self) -> tuple[float, float]:
        if self is BasisId.HERMITE:
            return (-math.inf, math.inf)
        return (-1.0, 1.0)

    @property
    def on_real_line(self) -> bool:
        return self is BasisId.HERMITE

    @classmethod
    def parse(cls, tag: str) -> "BasisId":
        aliases = {
            "hermite": cls.HERMITE,
            "hermitefunction": cls.HERMITE,
            "cheb1": cls.CHEBYSHEV_FIRST,
            "chebyshevfirst": cls.CHEBYSHEV_FIRST,
            "cheb2": cls.CHEBYSHEV_SECOND,
            "chebyshevsecond": cls.CHEBYSHEV_SECOND,
        }
        key = tag.strip().lower().replace("-", "").replace("_", "")
        if key not in aliases:
            raise ValueError(f"unknown basis {tag!r}")
        return aliases[key]


@dataclass(frozen=True)
class GfQuery:
    lam: float
    omega: float
    trunc_terms: int = 1

    def __post_init__(self):
        if not abs(self.omega) < 1:
            raise DomainError("omega must satisfy |omega| < 1")
        if self.trunc_terms < 1:
            raise ValueError("trunc_terms must be >= 1")


def _check_cheb_domain(lam):
    if np.any(np.abs(lam) > 1.0):
        raise DomainError("Chebyshev argument must lie in [-1, 1]")


# --------------------------------------------------------------------------
# pointwise evaluation


def hermite_poly(k: int, lam):
    """Probabilists' Hermite polynomial H_k by three-term recurrence."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > HERMITE_POLY_MAX_INDEX:
        raise IndexTooLarge(f"H_k overflows for k > {HERMITE_POLY_MAX_INDEX}")
    x = np.asarray(lam, dtype=float)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(k):
            prev, cur = cur, x * cur - j * prev
    if not np.all(np.isfinite(cur)):
        # |H_k| grows like sqrt(k!); below the index guard it can still overflow
        raise IndexTooLarge(f"H_{k} overflows double precision at the requested arguments")
    return cur if cur.ndim else float(cur)


def hermite_functions(n: int, lam) -> np.ndarray:
    """Rows Hhat_0 .. Hhat_n evaluated at ``lam``; shape ``(n + 1,) + lam.shape``.

    Uses the normalized recurrence
    ``Hhat_{k+1} = x/sqrt(k+1) Hhat_k - sqrt(k/(k+1)) Hhat_{k-1}``
    with the Gaussian factor kept as a separate log-scale so neither k! nor
    exp(-x^2/4) underflows/overflows.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > HERMITE_FUNCTION_MAX_INDEX:
        raise IndexTooLarge(f"Hermite functions limited to k <= {HERMITE_FUNCTION_MAX_INDEX}")
    x = np.asarray(lam, dtype=float)
    out = np.empty((n + 1,) + x.shape)
    log_scale = -0.25 * x * x
    scale = np.exp(log_scale)
    prev = np.zeros_like(x)
    cur = np.full_like(x, (2 * math.pi) ** -0.25)
    out[0] = cur * scale
    for k in range(n):
        prev, cur = cur, x * cur / math.sqrt(k + 1) - math.sqrt(k / (k + 1)) * prev
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            cur = np.where(big, cur / _RESCALE, cur)
            prev = np.where(big, prev / _RESCALE, prev)
            log_scale = np.where(big, log_scale + _LOG_RESCALE, log_scale)
            scale = np.exp(log_scale)
        out[k + 1] = cur * scale
    return out


def hermite_function(k: int, lam):
    """Orthonormal Hermite function Hhat_k(lam)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    v = hermite_functions(k, lam)[k]
    return v if v.ndim else float(v)


def chebyshev_t(k: int, lam):
    """Chebyshev polynomial of the first kind, T_k."""
    x = np.asarray(lam, dtype=float)
    _check_cheb_domain(x)
    v = chebyshev_t_all(k, x)[k]
    return v if v.ndim else float(v)


def chebyshev_u(k: int, lam):
    """Chebyshev polynomial of the second kind, U_k."""
    x = np.asarray(lam, dtype=float)
    v = chebyshev_u_all(k, x)[k]
    return v if v.ndim else float(v)


def _cheb_all(n, x, first):
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = x if first else 2 * x
    for k in range(1, n):
        out[k + 1] = 2 * x * out[k] - out[k - 1]
    return out


def chebyshev_t_all(n: int, lam) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    return _cheb_all(n, np.asarray(lam, dtype=float), first=True)


def chebyshev_u_all(n: int, lam) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    return _cheb_all(n, np.asarray(lam, dtype=float), first=False)


def basis_functions(basis: BasisId, n: int, lam, k0: str = "uniform") -> np.ndarray:
    """Rows ghat_0 .. ghat_n of the chosen orthonormal system.

    For Chebyshev bases ``k0="uniform"`` keeps the uniform sqrt(2/pi) factor;
    ``k0="orthonormal"`` uses 1/sqrt(pi) for T_0 (orthonormal under the
    weight (1 - x^2)^(-1/2)). The option has no effect on other bases.
    """
    if basis is BasisId.HERMITE:
        return hermite_functions(n, lam)
    x = np.asarray(lam, dtype=float)
    _check_cheb_domain(x)
    if basis is BasisId.CHEBYSHEV_FIRST:
        rows = _SQRT_2_OVER_PI * chebyshev_t_all(n, x)
        if k0 == "orthonormal":
            rows[0] = 1 / math.sqrt(math.pi)
        elif k0 != "uniform":
            raise ValueError("k0 must be 'uniform' or 'orthonormal'")
        return rows
    return _SQRT_2_OVER_PI * chebyshev_u_all(n, x)


# --------------------------------------------------------------------------
# generating functions


def mehler_gf(lam, omega):
    """Closed form of sum_k H_k(lam)^2 omega^k / k! for |omega| < 1."""
    omega = np.asarray(omega, dtype=float)
    if np.any(np.abs(omega) >= 1):
        raise DomainError("omega must satisfy |omega| < 1")
    lam = np.asarray(lam, dtype=float)
    v = np.exp(lam * lam * omega / (1 + omega)) / np.sqrt(1 - omega * omega)
    return v if v.ndim else float(v)


def gf_cheb1(lam, omega):
    """sum_k T_k(lam) omega^k = (1 - omega lam) / (1 - 2 omega lam + omega^2)."""
    lam, omega = np.asarray(lam, dtype=float), np.asarray(omega, dtype=float)
    if np.any(np.abs(omega) >= 1):
        raise DomainError("omega must satisfy |omega| < 1")
    _check_cheb_domain(lam)
    v = (1 - omega * lam) / (1 - 2 * omega * lam + omega * omega)
    return v if v.ndim else float(v)


def gf_cheb2(lam, omega):
    """sum_k U_k(lam) omega^k = 1 / (1 - 2 omega lam + omega^2)."""
    lam, omega = np.asarray(lam, dtype=float), np.asarray(omega, dtype=float)
    if np.any(np.abs(omega) >= 1):
        raise DomainError("omega must satisfy |omega| < 1")
    _check_cheb_domain(lam)
    v = 1 / (1 - 2 * omega * lam + omega * omega)
    return v if v.ndim else float(v)


def _gf_terms(basis: BasisId, lam: float, omega: float, kind: str):
    """Yield successive series terms (unbounded)."""
    if kind == "squared-normalized":
        if basis is not BasisId.HERMITE:
            raise ValueError("squared-normalized series is defined for the Hermite basis only")
        # h_k = H_k / sqrt(k!) keeps terms bounded
        prev, cur, w = 0.0, 1.0, 1.0
        k = 0
        while True:
            yield cur * cur * w
            prev, cur = cur, (lam * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
            w *= omega
            k += 1
    elif kind == "plain":
        if basis is BasisId.HERMITE:
            prev, cur, w, k = 0.0, 1.0, 1.0, 0
            while True:
                yield cur * w
                prev, cur = cur, lam * cur - k * prev
                w *= omega
                k += 1
        else:
            prev, cur = 1.0, (lam if basis is BasisId.CHEBYSHEV_FIRST else 2 * lam)
            yield 1.0
            w = omega
            while True:
                yield cur * w
                prev, cur = cur, 2 * lam * cur - prev
                w *= omega
    else:
        raise ValueError("kind must be 'plain' or 'squared-normalized'")


def gf_partial_sum(basis: BasisId, q: GfQuery, kind: str = "plain") -> tuple[float, float]:
    """Brute-force partial sum of the first ``q.trunc_terms`` series terms.

    Returns ``(sum, |last increment|)``. ``plain`` sums P_k(lam) omega^k;
    ``squared-normalized`` sums the Mehler terms H_k(lam)^2 omega^k / k!.
    """
    if basis is not BasisId.HERMITE:
        _check_cheb_domain(q.lam)
    terms = []
    for term in _gf_terms(basis, q.lam, q.omega, kind):
        terms.append(term)
        if len(terms) == q.trunc_terms:
            break
    return math.fsum(terms), abs(terms[-1])


def gf_series(basis: BasisId, lam: float, omega: float, kind: str = "plain",
              tol: float = 1e-13, max_terms: int = 100_000) -> tuple[float, int]:
    """Sum the generating-function series until increments stay below ``tol``.

    An increment can vanish at a zero of P_k, so summation stops only after
    ten consecutive small increments. Returns ``(sum, terms_used)``.
    """
    if not abs(omega) < 1:
        raise DomainError("omega must satisfy |omega| < 1")
    if basis is not BasisId.HERMITE:
        _check_cheb_domain(lam)
    terms, quiet = [], 0
    for term in _gf_terms(basis, lam, omega, kind):
        terms.append(term)
        quiet = quiet + 1 if abs(term) < tol else 0
        if quiet >= 10 or len(terms) >= max_terms:
            break
    return math.fsum(terms), len(terms)


# --------------------------------------------------------------------------
# integrals of generating functions


def dt_factor(omega: float, q: QuadSpec = QuadSpec()) -> float:
    """Integral over [-1, 1] of gf_cheb1(lam, omega)^2, by quadrature."""
    if not 0 < omega < 1:
        raise DomainError("omega must lie in (0, 1)")
    return integrate_finite(lambda x: gf_cheb1(x, omega) ** 2, -1.0, 1.0, q)


def dt_factor_paper(omega: float) -> float:
    """The printed closed-form expression for D_T(omega), evaluated literally.

    Kept only to measure how far it is from :func:`dt_factor`.
    """
    if not 0 < omega < 1:
        raise DomainError("omega must lie in (0, 1)")
    w = omega
    w2 = w * w
    lead = 2.0 / (w * (4 + 3 * w2 + w2 * w2))
    log_term = math.log((w2 - w + 2) / (w2 + w + 2))
    return lead * (w * (5 + 5 * w2 + 2 * w2) + (4 + 7 * w2 + 4 * w2 * w2 + w2 ** 3) * log_term)


def gf_cheb2_energy(omega: float, q: QuadSpec = QuadSpec()) -> float:
    """Integral over [-1, 1] of gf_cheb2(lam, omega)^2, by quadrature."""
    if not abs(omega) < 1:
        raise DomainError("omega must satisfy |omega| < 1")
    return integrate_finite(lambda x: gf_cheb2(x, omega) ** 2, -1.0, 1.0, q)


# --------------------------------------------------------------------------
# orthonormality


def hermite_gram_radius(K: int, q: QuadSpec) -> float:
    """Truncation radius that clears the turning point of Hhat_{K-1}."""
    return max(q.truncation_radius, 2.0 * math.sqrt(K + 0.5) + 8.0)


def gram_matrix(basis: BasisId, K: int, q: QuadSpec = QuadSpec()) -> np.ndarray:
    """Matrix of inner products <ghat_i, ghat_j>, 0 <= i, j < K.

    Hermite functions use Lebesgue measure on R. Chebyshev bases use their
    orthogonality weights, integrated after the substitution lam = cos(theta)
    so the endpoint singularity of the weight disappears.
    """
    if not 1 <= K <= GRAM_MAX_SIZE:
        raise ValueError(f"K must lie in [1, {GRAM_MAX_SIZE}]")
    iu = np.triu_indices(K)

    if basis is BasisId.HERMITE:
        def integrand(x):
            h = hermite_functions(K - 1, x)
            return h[iu[0]] * h[iu[1]]

        upper = integrate_real_line(integrand, q, radius=hermite_gram_radius(K, q))
    else:
        def integrand(theta):
            c = np.cos(theta)
            g = basis_functions(basis, K - 1, c, k0="orthonormal")
            if basis is BasisId.CHEBYSHEV_SECOND:
                g = g * np.sin(theta)
            return g[iu[0]] * g[iu[1]]

        upper = integrate_finite(integrand, 0.0, math.pi, q)
    G = np.zeros((K, K))
    G[iu] = upper
    G.T[iu] = upper
    return G
