"""Kernels f(t, lam), expansion coefficients and their approximations.

The process is X(t) = sum_k a_k(t) xi_k with a_k(t) = int f(t, lam) ghat_k(lam) dlam.
Indices run k = 0, 1, 2, ... for every basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .basis import BasisId, basis_functions, hermite_function
from .errors import NonConvergent, TailTooHeavy, UnknownKernel
from .numerics import (
    QuadSpec,
    TimeGrid,
    derivative,
    gauss_legendre_panels,
    integrate_finite,
    integrate_real_line,
)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Kernel:
    name: str
    domain: str  # "real", "interval" or "any"
    f: Callable
    df: Callable | None = None
    d2f: Callable | None = None
    defaults: Mapping[str, float] = field(default_factory=dict)


def _gauss_cos(t, x, scale=1.0):
    return scale * np.exp(-0.5 * x * x) * np.cos(t * x)


def _gauss_cos_d1(t, x, scale=1.0):
    return scale * np.exp(-0.5 * x * x) * (-x * np.cos(t * x) - t * np.sin(t * x))


def _gauss_cos_d2(t, x, scale=1.0):
    g = np.exp(-0.5 * x * x)
    return scale * g * ((x * x - 1 - t * t) * np.cos(t * x) + 2 * t * x * np.sin(t * x))


def _gauss_poly(t, x, scale=1.0):
    return scale * (1 + t * x * x) * np.exp(-0.5 * x * x)


def _gauss_poly_d1(t, x, scale=1.0):
    return scale * np.exp(-0.5 * x * x) * ((2 * t - 1) * x - t * x**3)


def _gauss_poly_d2(t, x, scale=1.0):
    x2 = x * x
    return scale * np.exp(-0.5 * x2) * (t * x2 * x2 - (5 * t - 1) * x2 + (2 * t - 1))


def _cheb_smooth(t, x, scale=1.0):
    return scale * np.exp(-t * x) * (1 - x * x)


def _cheb_smooth_d1(t, x, scale=1.0):
    return scale * np.exp(-t * x) * (-t * (1 - x * x) - 2 * x)


def _cheb_smooth_d2(t, x, scale=1.0):
    return scale * np.exp(-t * x) * (t * t * (1 - x * x) + 4 * t * x - 2)


def _cheb_cos(t, x, scale=1.0):
    return scale * np.cos(t + x)


def _cheb_cos_d1(t, x, scale=1.0):
    return -scale * np.sin(t + x)


def _gauss_quarter(t, x, scale=1.0):
    return scale * np.exp(-0.25 * x * x) + 0.0 * t


def _gauss_quarter_d1(t, x, scale=1.0):
    return -0.5 * x * _gauss_quarter(t, x, scale)


def _gauss_quarter_d2(t, x, scale=1.0):
    return (0.25 * x * x - 0.5) * _gauss_quarter(t, x, scale)


def _hermite_fn(t, x, order=0.0, scale=1.0):
    return scale * hermite_function(int(order), x) + 0.0 * t


def _zero(t, x, scale=1.0):
    return np.zeros(np.broadcast(np.asarray(t), np.asarray(x)).shape)


REGISTRY: dict[str, Kernel] = {
    k.name: k
    for k in [
        Kernel("gauss-cos", "real", _gauss_cos, _gauss_cos_d1, _gauss_cos_d2, {"scale": 1.0}),
        Kernel("gauss-poly", "real", _gauss_poly, _gauss_poly_d1, _gauss_poly_d2, {"scale": 1.0}),
        Kernel("cheb-smooth", "interval", _cheb_smooth, _cheb_smooth_d1, _cheb_smooth_d2, {"scale": 1.0}),
        Kernel("cheb-cos", "interval", _cheb_cos, _cheb_cos_d1,
               lambda t, x, scale=1.0: -_cheb_cos(t, x, scale), {"scale": 1.0}),
        # auxiliary kernels with known expansions, used for identity checks
        Kernel("gauss-quarter", "real", _gauss_quarter, _gauss_quarter_d1, _gauss_quarter_d2, {"scale": 1.0}),
        Kernel("hermite-function", "real", _hermite_fn, None, None, {"order": 0.0, "scale": 1.0}),
        Kernel("zero", "any", _zero, _zero, _zero, {"scale": 1.0}),
    ]
}

REGISTRY_KERNELS = ("gauss-cos", "gauss-poly", "cheb-smooth", "cheb-cos")


@dataclass(frozen=True)
class KernelSpec:
    """A registry kernel with parameters, horizon and (for ``zero``) a domain."""

    kernel_id: str
    params: Mapping[str, float] = field(default_factory=dict)
    horizon_T: float = 1.0
    domain: str | None = None
    use_analytic_derivs: bool = True

    def __post_init__(self):
        if self.kernel_id not in REGISTRY:
            raise UnknownKernel(self.kernel_id)
        kernel = REGISTRY[self.kernel_id]
        unknown = set(self.params) - set(kernel.defaults)
        if unknown:
            raise ValueError(f"kernel {self.kernel_id!r} has no parameter(s) {sorted(unknown)}")
        if not self.horizon_T > 0:
            raise ValueError("horizon_T must be positive")
        domain = self.domain or (kernel.domain if kernel.domain != "any" else "real")
        if kernel.domain != "any" and domain != kernel.domain:
            raise ValueError(f"kernel {self.kernel_id!r} lives on the {kernel.domain} domain")
        if domain not in ("real", "interval"):
            raise ValueError("domain must be 'real' or 'interval'")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "params", {**kernel.defaults, **self.params})

    @property
    def kernel(self) -> Kernel:
        return REGISTRY[self.kernel_id]

    def check_basis(self, basis: BasisId) -> None:
        want = "real" if basis.on_real_line else "interval"
        if self.domain != want:
            raise ValueError(f"kernel domain {self.domain!r} does not match basis {basis.value!r}")

    def has_analytic_derivs(self) -> bool:
        return self.use_analytic_derivs and self.kernel.d2f is not None


def kernel_eval(kernel: KernelSpec, t, lam):
    v = kernel.kernel.f(np.asarray(t, dtype=float), np.asarray(lam, dtype=float), **kernel.params)
    return v if np.ndim(v) else float(v)


def _integrate_domain(g, domain: str, q: QuadSpec):
    if domain == "real":
        return integrate_real_line(g, q)
    return integrate_finite(g, -1.0, 1.0, q)


def compute_coefficient(kernel: KernelSpec, basis: BasisId, k: int, t: float,
                        q: QuadSpec = QuadSpec(), k0: str = "uniform") -> float:
    """a_k(t) by adaptive quadrature of f(t, .) ghat_k over the basis support.

    Chebyshev coefficients are plain Lebesgue integrals over [-1, 1].
    """
    kernel.check_basis(basis)
    return _integrate_domain(
        lambda x: kernel_eval(kernel, t, x) * basis_functions(basis, k, x, k0)[k],
        kernel.domain, q,
    )


def kernel_energy(kernel: KernelSpec, t, q: QuadSpec = QuadSpec()):
    """int f(t, lam)^2 dlam for scalar or array ``t``."""
    t = np.asarray(t, dtype=float)
    v = _integrate_domain(lambda x: kernel_eval(kernel, t[..., None], x) ** 2, kernel.domain, q)
    return v if np.ndim(v) else float(v)


def cross_energy(kernel: KernelSpec, t: float, s: float, q: QuadSpec = QuadSpec()) -> float:
    """B(t, s) = int f(t, lam) f(s, lam) dlam."""
    return _integrate_domain(lambda x: kernel_eval(kernel, t, x) * kernel_eval(kernel, s, x), kernel.domain, q)


def coefficient_matrix(kernel: KernelSpec, basis: BasisId, n_max: int, t_points,
                       q: QuadSpec = QuadSpec(), k0: str = "uniform", start_panels: int = 8) -> np.ndarray:
    """All a_k(t_i), k = 0..n_max, as an ``(n_max + 1, len(t_points))`` array.

    The composite 15-point Gauss-Legendre rule is refined by doubling the
    number of equal panels until two successive levels agree to
    ``max(abs_tol, rel_tol |a|)`` in every entry.
    """
    kernel.check_basis(basis)
    t = np.asarray(t_points, dtype=float)
    if kernel.domain == "real":
        L = q.truncation_radius
        edge = np.abs(kernel_eval(kernel, t[:, None], np.array([-L, L])))
        # |ghat_k| <= 1 on R
        if edge.max() * 8.0 / L > q.abs_tol:
            raise TailTooHeavy(f"kernel not negligible at |lam|={L}")
        lo, hi = -L, L
    else:
        lo, hi = -1.0, 1.0

    prev = None
    panels = start_panels
    while panels <= max(q.max_subdivisions, start_panels):
        x, w = gauss_legendre_panels(lo, hi, panels)
        G = basis_functions(basis, n_max, x, k0)
        F = kernel_eval(kernel, t[:, None], x[None, :])
        A = G @ (F * w).T
        if prev is not None:
            # Cauchy-Schwarz bound on int |f ghat_k| sets the roundoff floor
            scale = np.sqrt((G * G) @ w)[:, None] * np.sqrt((F * F) @ w)[None, :]
            tol = np.maximum(np.maximum(q.abs_tol, q.rel_tol * np.abs(A)), 50 * _EPS * scale)
            if np.all(np.abs(A - prev) <= tol):
                return A
        prev = A
        panels *= 2
    raise NonConvergent(f"coefficient quadrature did not converge with {panels // 2} panels")


@dataclass(frozen=True)
class ApproxScheme:
    """How the approximations ahat_k(t) are produced from the exact a_k(t).

    kinds: ``exact``; ``coarse-quad`` (quadrature at tolerance ``tol``);
    ``round`` (to ``digits`` decimals); ``perturb`` (uniform offsets of at
    most ``amplitude``, reproducible from ``seed``).
    """

    kind: str = "exact"
    tol: float = 1e-3
    digits: int = 3
    seed: int = 0
    amplitude: float = 1e-4

    def __post_init__(self):
        if self.kind not in ("exact", "coarse-quad", "round", "perturb"):
            raise ValueError(f"unknown approximation scheme {self.kind!r}")
        if self.kind == "coarse-quad" and not 0 < self.tol < 1:
            raise ValueError("coarse-quad tolerance must lie in (0, 1)")
        if self.kind == "round" and self.digits < 0:
            raise ValueError("digits must be non-negative")
        if self.kind == "perturb" and not self.amplitude >= 0:
            raise ValueError("amplitude must be non-negative")


@dataclass(frozen=True)
class CoefficientTable:
    basis: BasisId
    t_grid: TimeGrid
    n_max: int
    a: np.ndarray
    a_hat: np.ndarray
    delta: np.ndarray
    f_norm_sq: np.ndarray
    k0: str = "uniform"
    quad_rel_tol: float = 1e-10

    def __post_init__(self):
        shape = (self.n_max + 1, len(self.t_grid))
        for name in ("a", "a_hat", "delta"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.setflags(write=False)
        if not np.array_equal(self.delta, np.abs(self.a - self.a_hat)):
            raise ValueError("delta must equal |a - a_hat|")

    def rows(self):
        """(k, t, a, a_hat, delta) tuples in k-major order."""
        t = self.t_grid.t_points
        for k in range(self.n_max + 1):
            for i in range(t.size):
                yield k, t[i], self.a[k, i], self.a_hat[k, i], self.delta[k, i]


def _approximate(a, scheme: ApproxScheme, recompute):
    if scheme.kind == "exact":
        return a.copy()
    if scheme.kind == "round":
        return np.round(a, scheme.digits)
    if scheme.kind == "coarse-quad":
        return recompute(scheme.tol)
    rng = np.random.Generator(np.random.Philox(key=[scheme.seed, 0xA5]))
    return a + scheme.amplitude * rng.uniform(-1.0, 1.0, size=a.shape)


def build_table(kernel: KernelSpec, basis: BasisId, n_max: int, t_grid: TimeGrid,
                q: QuadSpec = QuadSpec(), approx_scheme: ApproxScheme = ApproxScheme(),
                k0: str = "uniform") -> CoefficientTable:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    kernel.check_basis(basis)
    t = t_grid.t_points
    a = coefficient_matrix(kernel, basis, n_max, t, q, k0)

    def coarse(tol):
        return coefficient_matrix(kernel, basis, n_max, t, q.with_tol(max(tol, 1e-14), max(tol, 1e-15)), k0,
                                  start_panels=1)

    a_hat = _approximate(a, approx_scheme, coarse)
    return CoefficientTable(
        basis=basis,
        t_grid=t_grid,
        n_max=n_max,
        a=a,
        a_hat=a_hat,
        delta=np.abs(a - a_hat),
        f_norm_sq=np.asarray(kernel_energy(kernel, t, q), dtype=float),
        k0=k0,
        quad_rel_tol=q.rel_tol,
    )


# --------------------------------------------------------------------------
# Z_f functional


def zf_eval(kernel: KernelSpec, t, lam):
    """|f'' - lam f' + (lam^2 - 2)/4 f| with derivatives in lam."""
    lam = np.asarray(lam, dtype=float)
    f = kernel_eval(kernel, t, lam)
    if kernel.has_analytic_derivs():
        d1 = kernel.kernel.df(t, lam, **kernel.params)
        d2 = kernel.kernel.d2f(t, lam, **kernel.params)
    else:
        g = lambda x: kernel_eval(kernel, t, x)  # noqa: E731
        d1 = derivative(g, lam, 1)
        d2 = derivative(g, lam, 2)
    v = np.abs(d2 - lam * d1 + 0.25 * (lam * lam - 2) * f)
    return v if np.ndim(v) else float(v)


def zf_energy(kernel: KernelSpec, t, q: QuadSpec = QuadSpec()):
    """int Z_f(t, lam)^2 dlam over R, for scalar or array ``t``.

    With finite-difference derivatives the integrand carries ~1e-8 relative
    noise, so the quadrature tolerance is relaxed to 1e-6.
    """
    if kernel.domain != "real":
        raise ValueError("Z_f energy is defined for kernels on the real line")
    t = np.asarray(t, dtype=float)
    if not kernel.has_analytic_derivs():
        q = q.with_tol(max(q.rel_tol, 1e-6), max(q.abs_tol, 1e-9))
    v = integrate_real_line(lambda x: zf_eval(kernel, t[..., None], x) ** 2, q)
    return v if np.ndim(v) else float(v)


# --------------------------------------------------------------------------
# correlation identity


def correlation_residual(table: CoefficientTable, kernel: KernelSpec, t: float, s: float,
                         K: int, q: QuadSpec = QuadSpec()) -> float:
    """|B(t, s) - sum_{k=0}^{K} a_k(t) a_k(s)|."""
    if not 0 <= K <= table.n_max:
        raise ValueError("K must lie in [0, n_max]")
    i, j = table.t_grid.index_of(t), table.t_grid.index_of(s)
    partial = math.fsum(table.a[: K + 1, i] * table.a[: K + 1, j])
    return abs(cross_energy(kernel, t, s, q) - partial)


def bessel_partial_sums(table: CoefficientTable) -> np.ndarray:
    """Cumulative sums of a_k(t)^2 over k, shape ``(n_max + 1, n_t)``."""
    return np.cumsum(table.a**2, axis=0)
