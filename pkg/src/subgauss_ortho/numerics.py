"""Quadrature, finite differences and discrete L_p norms.

Integrands are called with a 1-D array of abscissae and may return either an
array of the same length or an array whose *last* axis runs over the
abscissae (vector-valued integrands). Scalar-only callables are detected and
evaluated point by point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonConvergent, TailTooHeavy

_EPS = np.finfo(float).eps
_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)
# roundoff floor, in units of eps * integral of |g|
_ROUNDOFF_FACTOR = 50.0


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 4000
    truncation_radius: float = 12.0

    def __post_init__(self):
        if not self.rel_tol >= 1e-14:
            raise ValueError("rel_tol must be >= 1e-14")
        if not self.abs_tol >= 1e-15:
            raise ValueError("abs_tol must be >= 1e-15")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if not self.truncation_radius > 0:
            raise ValueError("truncation_radius must be positive")

    def with_tol(self, rel_tol: float, abs_tol: float | None = None) -> "QuadSpec":
        return QuadSpec(
            rel_tol=rel_tol,
            abs_tol=self.abs_tol if abs_tol is None else abs_tol,
            max_subdivisions=self.max_subdivisions,
            truncation_radius=self.truncation_radius,
        )


@dataclass(frozen=True)
class TimeGrid:
    t_points: np.ndarray
    T: float

    def __post_init__(self):
        t = np.asarray(self.t_points, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time grid needs at least 2 points")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if t[0] < 0 or t[-1] > self.T:
            raise ValueError("time grid must lie in [0, T]")
        t.setflags(write=False)
        object.__setattr__(self, "t_points", t)

    @classmethod
    def uniform(cls, T: float, n_points: int = 513) -> "TimeGrid":
        return cls(np.linspace(0.0, T, n_points), T)

    def __len__(self):
        return self.t_points.size

    def index_of(self, t: float) -> int:
        """Index of the grid point equal to ``t`` (to 1e-12 relative)."""
        i = int(np.argmin(np.abs(self.t_points - t)))
        if abs(self.t_points[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a grid point")
        return i


def _evaluate(g: Callable, x: np.ndarray) -> np.ndarray:
    try:
        y = np.asarray(g(x), dtype=float)
    except TypeError:
        y = None
    if y is None or y.ndim == 0:
        y = np.array([g(float(xi)) for xi in x], dtype=float)
        if y.ndim > 1:
            y = np.moveaxis(y, 0, -1)
    elif y.shape[-1] != x.shape[0]:
        raise ValueError("integrand returned an array whose last axis does not match the nodes")
    return y


def _gl15(g, a, b):
    half = 0.5 * (b - a)
    y = _evaluate(g, half * _GL_X + 0.5 * (a + b))
    return half * (y @ _GL_W), half * (np.abs(y) @ _GL_W)


def adaptive_gauss_legendre(g: Callable, a: float, b: float, q: QuadSpec):
    """Globally adaptive composite 15-point Gauss-Legendre quadrature.

    Each panel is compared against the sum over its two halves; the panel
    with the largest error relative to the tolerance is bisected until the
    summed estimate meets ``max(abs_tol, rel_tol*|I|)`` componentwise.

    Returns
    -------
    (value, error) : arrays (or floats for scalar integrands)
    """
    if not a < b:
        raise ValueError("integration interval must satisfy a < b")

    def node(lo, hi, whole):
        mid = 0.5 * (lo + hi)
        left, left_abs = _gl15(g, lo, mid)
        right, right_abs = _gl15(g, mid, hi)
        return [lo, hi, left, right, left + right, left_abs + right_abs, np.abs(whole - left - right)]

    whole, _ = _gl15(g, a, b)
    nodes = [node(a, b, whole)]
    for _ in range(q.max_subdivisions + 1):
        value = sum(n[4] for n in nodes)
        value_abs = sum(n[5] for n in nodes)
        errs = np.array([n[6] for n in nodes])
        err = errs.sum(axis=0)
        tol = np.maximum(
            np.maximum(q.abs_tol, q.rel_tol * np.abs(value)),
            _ROUNDOFF_FACTOR * _EPS * value_abs,
        )
        if np.all(err <= tol):
            return value, err
        if len(nodes) > q.max_subdivisions:
            break
        scaled = (errs / tol).reshape(len(nodes), -1).max(axis=1)
        lo, hi, left, right, *_ = nodes.pop(int(np.argmax(scaled)))
        mid = 0.5 * (lo + hi)
        nodes.append(node(lo, mid, left))
        nodes.append(node(mid, hi, right))
    raise NonConvergent(
        f"quadrature on [{a}, {b}] did not reach tolerance after {q.max_subdivisions} subdivisions"
    )


def integrate_finite(g: Callable, a: float, b: float, q: QuadSpec = QuadSpec()):
    """Integral of ``g`` over ``[a, b]``; vector-valued ``g`` gives an array."""
    value, _ = adaptive_gauss_legendre(g, a, b, q)
    return float(value) if np.ndim(value) == 0 else value


def _tail_estimate(g, L):
    edge = np.abs(_evaluate(g, np.array([-L, L])))
    # |g| <= C exp(-x^2/8) beyond L gives a tail of at most |g(L)| * 4 / L per side
    return edge.sum(axis=-1) * 4.0 / L


def integrate_real_line(g: Callable, q: QuadSpec = QuadSpec(), radius: float | None = None):
    """Integral of ``g`` over the real line, truncated to ``[-L, L]``.

    The integrand must decay at least like ``exp(-x^2/8)`` beyond ``L``
    (``q.truncation_radius`` unless ``radius`` is given). The size of ``g`` at
    ``+-L`` is checked against that contract.

    Raises
    ------
    TailTooHeavy
        If the estimated tail exceeds the quadrature tolerance.
    """
    L = q.truncation_radius if radius is None else radius
    value, err = adaptive_gauss_legendre(g, -L, L, q)
    tail = _tail_estimate(g, L)
    tol = np.maximum(q.abs_tol, q.rel_tol * np.abs(value))
    if np.any(tail > tol):
        raise TailTooHeavy(f"integrand not negligible at |x|={L}: tail estimate {np.max(tail):.3e}")
    return float(value) if np.ndim(value) == 0 else value


def gauss_legendre_panels(a: float, b: float, n_panels: int):
    """Nodes and weights of the composite 15-point rule on ``n_panels`` equal panels."""
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    x = (mids[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def derivative(g: Callable, x: float, order: int = 1, h: float | None = None) -> float:
    """Central finite difference of order 1 or 2 (``x`` may be an array)."""
    scale = np.maximum(1.0, np.abs(x))
    if order == 1:
        h = scale * _EPS ** (1 / 3) if h is None else h
        return (g(x + h) - g(x - h)) / (2 * h)
    if order == 2:
        h = scale * _EPS ** (1 / 4) if h is None else h
        return (g(x + h) - 2 * g(x) + g(x - h)) / (h * h)
    raise ValueError("order must be 1 or 2")


def trapezoid(values, grid: TimeGrid):
    """Trapezoid-rule integral over the time grid along the last axis."""
    return np.trapezoid(values, grid.t_points, axis=-1)


def lp_norm_on_grid(values, grid: TimeGrid, p: float):
    """Trapezoid-rule L_p(0, T) norm of grid values.

    ``values`` may carry leading axes (e.g. one row per path); the norm is
    taken along the last axis.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    out = trapezoid(np.abs(np.asarray(values, dtype=float)) ** p, grid) ** (1.0 / p)
    return float(out) if np.ndim(out) == 0 else out
