"""Error functionals c_N and the truncation-order calibration.

Five functionals are available (see :class:`BoundMethod`). All share the
pass/fail test :func:`subgauss_ortho.phi.check_conditions`. Indices are
0-based; a model of order N keeps the terms k = 0..N.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisId, dt_factor, dt_factor_paper
from .errors import DomainError, TailNotNegligible
from .expansion import CoefficientTable, KernelSpec, zf_energy
from .numerics import QuadSpec, integrate_finite, trapezoid
from .phi import AccuracySpec, PhiParams, check_conditions, xi_norm

NEGATIVE_BRACKET = "NegativeBracket"
SIGN_CORRECTED = "SignCorrectedEnvelope"
TAIL_GATE = 0.01
_DIRECT_TERMS = 100_000


class BoundMethod(enum.Enum):
    GENERAL = "general"
    HERMITE_TAIL = "hermite-tail"
    HERMITE_GF = "hermite-gf"
    CHEBYSHEV_T = "cheb-t"
    CHEBYSHEV_U = "cheb-u"

    @property
    def required_basis(self) -> BasisId | None:
        return {
            BoundMethod.HERMITE_TAIL: BasisId.HERMITE,
            BoundMethod.HERMITE_GF: BasisId.HERMITE,
            BoundMethod.CHEBYSHEV_T: BasisId.CHEBYSHEV_FIRST,
            BoundMethod.CHEBYSHEV_U: BasisId.CHEBYSHEV_SECOND,
        }.get(self)

    @property
    def uses_generating_function(self) -> bool:
        return self in (BoundMethod.HERMITE_GF, BoundMethod.CHEBYSHEV_T, BoundMethod.CHEBYSHEV_U)


@dataclass(frozen=True)
class BoundRow:
    N: int
    c_n: float
    threshold_reliability: float
    threshold_accuracy: float
    passed: bool
    flags: tuple[str, ...] = ()


@dataclass
class BoundReport:
    method: BoundMethod
    per_N: list[BoundRow]
    minimal_N: int | None
    diagnostics: list[str] = field(default_factory=list)
    info: dict[str, float] = field(default_factory=dict)


# --------------------------------------------------------------------------
# tail sums


def _tail_integral(M: int, omega: float) -> float:
    """sum_{k > M} x^k / ((k+1)(k+2)) with x = omega^2, from its integral form

    x^(M+1) int_0^1 (1-v)^(M+1) v / (v + (1-v)(1-x)) dv.
    """
    log_x = 2.0 * math.log(omega)
    scale = math.exp((M + 1) * log_x)
    if scale == 0.0:
        return 0.0
    d = -math.expm1(log_x)
    # normalised so the integral lies in [1, M + 3]
    norm = (M + 2.0) * (M + 3.0)

    def g(v):
        return norm * np.exp((M + 1) * np.log1p(-v)) * v / (v + (1 - v) * d)

    q = QuadSpec(rel_tol=1e-13, abs_tol=1e-15)
    # the integrand is concentrated within ~1/M of v = 0
    split = min(1.0, 60.0 / (M + 2))
    total = integrate_finite(g, 0.0, split, q)
    if split < 1.0:
        total += integrate_finite(g, split, 1.0, q)
    return scale * total / norm


def hermite_tail_sum(N: int, omega: float, tol: float = 1e-17) -> float:
    """sum_{k > N} omega^(2k) / ((k+1)(k+2)), tau^2 factored out.

    For omega = 1 the series telescopes to 1/(N+2). Otherwise terms are
    added (exactly rounded) until the geometric tail bound falls below
    ``tol`` times the first term; when that would take more than
    ``_DIRECT_TERMS`` terms the rest is taken from its integral form.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if not 0 < omega <= 1:
        raise DomainError("omega must lie in (0,1]")
    if omega == 1:
        return 1.0 / (N + 2)
    x = omega * omega
    log_x = math.log(x)
    first = N + 1
    # tail after index k is below x^(k+1) / ((k+2)(k+3)(1-x)) <= tol * x^first / ((first+1)(first+2))
    log_target = math.log(tol) + math.log1p(-x)
    extra = max(int(math.ceil(log_target / log_x)) + 1, 1)
    rest = 0.0
    if extra > _DIRECT_TERMS:
        extra = _DIRECT_TERMS
        rest = _tail_integral(N + extra, omega)
    k = np.arange(first, first + extra, dtype=float)
    terms = np.power(omega, 2 * k) / ((k + 1) * (k + 2))
    return math.fsum(terms.tolist() + [rest])


def _series_remainder(table: CoefficientTable, phi: PhiParams) -> np.ndarray:
    """Upper bracket for the neglected terms sum_{k > n_max} tau_phi(xi_k)^2 a_k(t)^2."""
    n = table.n_max
    tau2 = phi.tau**2
    if table.basis is BasisId.HERMITE:
        # Parseval: sum over all k of a_k^2 equals int f^2; differences below
        # the quadrature resolution are indistinguishable from zero
        defect = table.f_norm_sq - np.sum(table.a**2, axis=0)
        defect = np.where(defect > 10 * table.quad_rel_tol * table.f_norm_sq, defect, 0.0)
        return tau2 * phi.omega ** (2 * (n + 1)) * defect
    # Cauchy-Schwarz with the Lebesgue norm of ghat_k on [-1, 1]
    if phi.omega == 1:
        return np.full_like(table.f_norm_sq, np.inf)
    x = phi.omega**2
    if table.basis is BasisId.CHEBYSHEV_FIRST:
        geo = x ** (n + 1) / (1 - x) * (4 / math.pi)
    else:
        k = np.arange(n + 1, n + 1 + 20_000, dtype=float)
        geo = math.fsum((np.exp(k * math.log(x)) * (k + 1) ** 2).tolist()) * (4 / math.pi)
    return tau2 * geo * table.f_norm_sq


# --------------------------------------------------------------------------
# evaluators


class _Evaluator:
    """Precomputed pieces of one functional; ``value(N)`` returns (c_N, flags)."""

    def __init__(self, method: BoundMethod, table: CoefficientTable, kernel: KernelSpec | None,
                 phi: PhiParams, acc: AccuracySpec, q: QuadSpec, zf: np.ndarray | None = None):
        need = method.required_basis
        if need is not None and table.basis is not need:
            raise ValueError(f"method {method.value!r} requires the {need.value!r} basis")
        if method.uses_generating_function and not phi.omega < 1:
            raise DomainError("omega must lie in (0,1) for generating-function bounds")
        self.method, self.table, self.phi, self.acc = method, table, phi, acc
        self.info: dict[str, float] = {}
        self.flags: list[str] = []
        k = np.arange(table.n_max + 1)
        norms = xi_norm(k, phi)
        # head[N] = sum_{k<=N} tau_phi(xi_k)^2 delta_k^2
        self.head = np.cumsum((norms**2)[:, None] * table.delta**2, axis=0)

        if method is BoundMethod.GENERAL:
            w = (norms**2)[:, None] * table.a**2
            # tail[N] = sum_{N < k <= n_max}
            rev = np.cumsum(w[::-1], axis=0)[::-1]
            self.tail = np.vstack([rev[1:], np.zeros((1, w.shape[1]))])
            self.remainder = _series_remainder(table, phi)
            self.info["remainder_max"] = float(np.max(self.remainder))
        elif method is BoundMethod.HERMITE_TAIL:
            if zf is None:
                if kernel is None:
                    raise ValueError("the Hermite tail bound needs the kernel")
                zf = zf_energy(kernel, table.t_grid.t_points, q)
            self.zf = np.asarray(zf, dtype=float)
        else:
            root_f = np.sqrt(table.f_norm_sq)
            if method is BoundMethod.HERMITE_GF:
                self.envelope = phi.tau / math.sqrt(1 - phi.omega**2) * root_f
            elif method is BoundMethod.CHEBYSHEV_T:
                dt = dt_factor(phi.omega, q)
                self.info["dt_factor"] = dt
                self.info["dt_factor_paper"] = dt_factor_paper(phi.omega)
                self.envelope = math.sqrt(2 / math.pi) * phi.tau * root_f * math.sqrt(dt)
            else:
                # the printed constant 2/(sqrt(pi)(omega^2 - 1)) is negative on (0, 1)
                self.flags.append(SIGN_CORRECTED)
                self.envelope = 2 * phi.tau / (math.sqrt(math.pi) * abs(phi.omega**2 - 1)) * root_f
            self.model_sum = np.cumsum(norms[:, None] * table.a_hat, axis=0)

    def _check_N(self, N):
        if not 0 <= N <= self.table.n_max:
            raise ValueError(f"N must lie in [0, {self.table.n_max}]")

    def value(self, N: int) -> tuple[float, tuple[str, ...]]:
        self._check_N(N)
        p, grid = self.acc.p, self.table.t_grid
        if self.method is BoundMethod.GENERAL:
            bracket = self.head[N] + self.tail[N]
            c = float(trapezoid(bracket ** (p / 2), grid))
            upper = float(trapezoid((bracket + self.remainder) ** (p / 2), grid))
            if upper - c > TAIL_GATE * c:
                raise TailNotNegligible(
                    f"series remainder beyond n_max={self.table.n_max} changes c_N by "
                    f"{upper - c:.3e} (c_N = {c:.3e})"
                )
            return c, ()
        if self.method is BoundMethod.HERMITE_TAIL:
            s = hermite_tail_sum(N, self.phi.omega)
            bracket = self.zf * self.phi.tau**2 * s + self.head[N]
            return float(trapezoid(bracket ** (p / 2), grid)), ()
        bracket = self.envelope - self.model_sum[N]
        flags = ()
        if np.any(bracket < 0):
            flags = (NEGATIVE_BRACKET,)
            bracket = np.maximum(bracket, 0.0)
        return float(trapezoid(bracket**p, grid)), flags


def _single(method, table, kernel, phi, acc, N, q):
    return _Evaluator(method, table, kernel, phi, acc, q).value(N)[0]


def c_n_general(table: CoefficientTable, phi: PhiParams, acc: AccuracySpec, N: int) -> float:
    """int_0^T (sum_{k<=N} tau_k^2 delta_k^2 + sum_{k>N} tau_k^2 a_k^2)^(p/2) dt.

    The infinite tail is cut at the table's ``n_max``.

    Raises
    ------
    TailNotNegligible
        If the bound on the neglected terms moves c_N by more than 1%.
    """
    return _single(BoundMethod.GENERAL, table, None, phi, acc, N, QuadSpec())


def c_n_hermite_tail(table, kernel, phi, acc, N, q: QuadSpec = QuadSpec()) -> float:
    """Tail of the Hermite series bounded through the Z_f energy."""
    return _single(BoundMethod.HERMITE_TAIL, table, kernel, phi, acc, N, q)


def c_n_hermite_gf(table, kernel, phi, acc, N, q: QuadSpec = QuadSpec()) -> float:
    """Mehler-envelope functional; negative brackets are clamped to zero."""
    return _single(BoundMethod.HERMITE_GF, table, kernel, phi, acc, N, q)


def c_n_cheb1(table, kernel, phi, acc, N, q: QuadSpec = QuadSpec()) -> float:
    return _single(BoundMethod.CHEBYSHEV_T, table, kernel, phi, acc, N, q)


def c_n_cheb2(table, kernel, phi, acc, N, q: QuadSpec = QuadSpec()) -> float:
    return _single(BoundMethod.CHEBYSHEV_U, table, kernel, phi, acc, N, q)


C_N = {
    BoundMethod.GENERAL: lambda table, kernel, phi, acc, N, q=QuadSpec(): c_n_general(table, phi, acc, N),
    BoundMethod.HERMITE_TAIL: c_n_hermite_tail,
    BoundMethod.HERMITE_GF: c_n_hermite_gf,
    BoundMethod.CHEBYSHEV_T: c_n_cheb1,
    BoundMethod.CHEBYSHEV_U: c_n_cheb2,
}


def evaluate(method: BoundMethod, table: CoefficientTable, kernel: KernelSpec | None, phi: PhiParams,
             acc: AccuracySpec, n_values, q: QuadSpec = QuadSpec(), zf=None) -> BoundReport:
    """c_N and the threshold test for every N in ``n_values`` (ascending)."""
    ev = _Evaluator(method, table, kernel, phi, acc, q, zf=zf)
    rows = []
    for N in sorted(int(n) for n in n_values):
        c, flags = ev.value(N)
        chk = check_conditions(c, acc, phi)
        rows.append(BoundRow(N, c, chk.threshold_reliability, chk.threshold_accuracy, chk.passed, flags))
    diagnostics = sorted(set(ev.flags).union(*(r.flags for r in rows)))
    minimal = next((r.N for r in rows if r.passed), None)
    return BoundReport(method, rows, minimal, diagnostics, dict(ev.info))


def calibrate(method: BoundMethod, table: CoefficientTable, kernel: KernelSpec | None, phi: PhiParams,
              acc: AccuracySpec, n_min: int = 0, n_max_search: int | None = None,
              q: QuadSpec = QuadSpec(), zf=None) -> BoundReport:
    """Smallest N in ``[n_min, n_max_search]`` passing both threshold conditions.

    Every N in the range is evaluated: the functionals need not be
    monotone in N. ``minimal_N`` is None when no order in range passes.
    """
    n_max_search = table.n_max if n_max_search is None else n_max_search
    if not 0 <= n_min <= n_max_search <= table.n_max:
        raise ValueError("need 0 <= n_min <= n_max_search <= table.n_max")
    return evaluate(method, table, kernel, phi, acc, range(n_min, n_max_search + 1), q, zf=zf)
