import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subgauss_ortho.basis import hermite_function
from subgauss_ortho.errors import NonConvergent, TailTooHeavy
from subgauss_ortho.numerics import (
    QuadSpec,
    TimeGrid,
    derivative,
    gauss_legendre_panels,
    integrate_finite,
    integrate_real_line,
    lp_norm_on_grid,
)


class TestQuadSpec:
    def test_defaults(self):
        q = QuadSpec()
        assert q.rel_tol == 1e-10 and q.truncation_radius == 12.0

    @pytest.mark.parametrize("kwargs", [
        {"rel_tol": 1e-15}, {"abs_tol": 1e-16}, {"max_subdivisions": 0}, {"truncation_radius": 0.0},
    ])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            QuadSpec(**kwargs)

    def test_with_tol_keeps_other_fields(self):
        q = QuadSpec(truncation_radius=15.0).with_tol(1e-6)
        assert q.rel_tol == 1e-6 and q.truncation_radius == 15.0 and q.abs_tol == 1e-13


class TestTimeGrid:
    def test_uniform(self):
        g = TimeGrid.uniform(2.0, 5)
        assert len(g) == 5
        assert g.t_points[-1] == 2.0
        assert g.index_of(1.5) == 3

    @pytest.mark.parametrize("pts,T", [([0.0], 1.0), ([0.0, 0.5, 0.5], 1.0), ([-0.1, 1.0], 1.0), ([0.0, 1.2], 1.0)])
    def test_invalid(self, pts, T):
        with pytest.raises(ValueError):
            TimeGrid(np.array(pts), T)

    def test_index_of_off_grid(self):
        with pytest.raises(ValueError):
            TimeGrid.uniform(1.0, 3).index_of(0.3)

    def test_points_are_read_only(self):
        g = TimeGrid.uniform(1.0, 3)
        with pytest.raises(ValueError):
            g.t_points[0] = 1.0


class TestIntegrateFinite:
    def test_square(self):
        assert integrate_finite(lambda x: x**2, -1, 1) == pytest.approx(2 / 3, rel=1e-12)

    def test_constant(self):
        assert integrate_finite(lambda x: np.ones_like(x), -1, 1) == pytest.approx(2.0, rel=1e-14)

    def test_squared_cheb2_generating_function(self):
        v = integrate_finite(lambda x: (1 / (1 - x + 0.25)) ** 2, -1, 1)
        assert v == pytest.approx(2 / 0.75**2, rel=1e-10)

    def test_scalar_only_integrand(self):
        assert integrate_finite(lambda x: math.exp(x), 0, 1) == pytest.approx(math.e - 1, rel=1e-12)

    def test_vector_valued(self):
        v = integrate_finite(lambda x: np.stack([x, x**2, x**3]), 0, 1)
        np.testing.assert_allclose(v, [1 / 2, 1 / 3, 1 / 4], rtol=1e-12)

    def test_endpoint_singularity(self):
        v = integrate_finite(lambda x: 1 / np.sqrt(x), 0, 1, QuadSpec(rel_tol=1e-8))
        assert v == pytest.approx(2.0, rel=1e-7)

    def test_budget_exhausted(self):
        with pytest.raises(NonConvergent):
            integrate_finite(lambda x: np.sin(1 / x), 1e-6, 1, QuadSpec(rel_tol=1e-14, max_subdivisions=3))

    def test_linearity(self):
        q = QuadSpec()
        g, h = np.sin, np.exp
        lhs = integrate_finite(lambda x: 2 * g(x) - 3 * h(x), 0, 2, q)
        rhs = 2 * integrate_finite(g, 0, 2, q) - 3 * integrate_finite(h, 0, 2, q)
        assert abs(lhs - rhs) <= 2 * max(q.abs_tol, q.rel_tol * abs(lhs))

    @pytest.mark.parametrize("power", [0, 1, 2, 5])
    def test_refinement_monotone(self, power):
        exact = (1 - (-1) ** (power + 1)) / (power + 1)
        errs = [abs(integrate_finite(lambda x: x**power, -1, 1, QuadSpec(rel_tol=r)) - exact)
                for r in (1e-4, 5e-5, 2.5e-5, 1e-10)]
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_deterministic(self):
        f = lambda x: np.exp(-x) * np.cos(5 * x)
        assert integrate_finite(f, 0, 3) == integrate_finite(f, 0, 3)


class TestIntegrateRealLine:
    def test_gaussian(self):
        assert integrate_real_line(lambda x: np.exp(-x**2 / 2)) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)

    def test_odd(self):
        assert abs(integrate_real_line(lambda x: x * np.exp(-x**2 / 2))) < 1e-13

    def test_hermite_zero_normalized(self):
        assert integrate_real_line(lambda x: hermite_function(0, x) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_heavy_tail_rejected(self):
        with pytest.raises(TailTooHeavy):
            integrate_real_line(lambda x: 1 / (1 + x**2))


def test_panels_integrate_polynomials_exactly():
    x, w = gauss_legendre_panels(-1, 2, 3)
    assert w.sum() == pytest.approx(3.0, rel=1e-14)
    assert np.dot(w, x**9) == pytest.approx((2**10 - 1) / 10, rel=1e-13)


class TestDerivative:
    def test_first(self):
        assert derivative(lambda x: x**2, 3.0, 1) == pytest.approx(6.0, abs=1e-7)

    def test_second(self):
        assert derivative(lambda x: x**2, 0.0, 2) == pytest.approx(2.0, abs=1e-6)

    def test_second_of_gaussian(self):
        assert derivative(lambda x: np.exp(-x**2 / 4), 0.0, 2) == pytest.approx(-0.5, abs=1e-6)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            derivative(np.sin, 0.0, 3)

    def test_array_argument(self):
        x = np.linspace(-1, 1, 5)
        np.testing.assert_allclose(derivative(np.sin, x, 1), np.cos(x), atol=1e-9)

    @pytest.mark.parametrize("order", [1, 2])
    @pytest.mark.parametrize("x", np.linspace(-3, 3, 13))
    def test_cross_check(self, order, x):
        poly = np.polynomial.Polynomial([0.3, -1.0, 0.5, 0.2, -0.1])
        cases = [
            (np.sin, np.cos if order == 1 else (lambda v: -np.sin(v))),
            (np.exp, np.exp),
            (poly, poly.deriv(order)),
        ]
        for g, dg in cases:
            assert abs(derivative(g, x, order) - dg(x)) <= 1e-6


class TestLpNorm:
    def test_constant(self):
        g = TimeGrid.uniform(2.0, 11)
        assert lp_norm_on_grid(np.full(11, 3.0), g, 3) == pytest.approx(3.0 * 2.0 ** (1 / 3), rel=1e-14)

    def test_zero(self):
        assert lp_norm_on_grid(np.zeros(7), TimeGrid.uniform(1.0, 7), 2) == 0.0

    def test_linear(self):
        g = TimeGrid.uniform(1.0, 513)
        assert lp_norm_on_grid(g.t_points, g, 2) == pytest.approx(1 / math.sqrt(3), rel=1e-5)

    def test_batched_rows(self):
        g = TimeGrid.uniform(1.0, 9)
        v = np.stack([np.ones(9), 2 * np.ones(9)])
        np.testing.assert_allclose(lp_norm_on_grid(v, g, 2), [1.0, 2.0])

    def test_p_below_one(self):
        with pytest.raises(ValueError):
            lp_norm_on_grid(np.ones(3), TimeGrid.uniform(1.0, 3), 0.5)

    def test_triangle_inequality(self, rng):
        g = TimeGrid.uniform(1.0, 65)
        for _ in range(1000):
            p = rng.uniform(1, 6)
            x, y = rng.normal(size=(2, 65))
            lhs = lp_norm_on_grid(x + y, g, p)
            assert lhs <= (lp_norm_on_grid(x, g, p) + lp_norm_on_grid(y, g, p)) * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-5, 5), width=st.floats(0.1, 5), c=st.integers(0, 6))
def test_polynomial_integrals_match_antiderivative(a, width, c):
    b = a + width
    exact = (b ** (c + 1) - a ** (c + 1)) / (c + 1)
    q = QuadSpec()
    got = integrate_finite(lambda x: x**c, a, b, q)
    scale = max(abs(a), abs(b)) ** c * width
    assert abs(got - exact) <= max(q.abs_tol, q.rel_tol * abs(exact)) + 1e-14 * scale
