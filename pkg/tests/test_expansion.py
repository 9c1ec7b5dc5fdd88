import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from subgauss_ortho.basis import BasisId, basis_functions, hermite_function
from subgauss_ortho.errors import UnknownKernel
from subgauss_ortho.expansion import (
    REGISTRY_KERNELS,
    ApproxScheme,
    CoefficientTable,
    KernelSpec,
    bessel_partial_sums,
    build_table,
    coefficient_matrix,
    compute_coefficient,
    correlation_residual,
    kernel_energy,
    kernel_eval,
    zf_energy,
    zf_eval,
)
from subgauss_ortho.numerics import QuadSpec, TimeGrid

# mpmath, 25 digits: int exp(-x^2/2) Hhat_0(x) dx
A0_GAUSS_COS = 1.292704729016130350448439
# scipy.integrate.quad of Z_f^2 with hand-derived derivatives, gauss-cos at t=0
ZF_GAUSS_COS_T0 = 4.735775132888175
HERMITE = BasisId.HERMITE
CHEB1 = BasisId.CHEBYSHEV_FIRST
CHEB2 = BasisId.CHEBYSHEV_SECOND


def small_grid(n=9):
    return TimeGrid.uniform(1.0, n)


class TestKernels:
    def test_gauss_cos(self):
        k = KernelSpec("gauss-cos")
        x = np.linspace(-3, 3, 7)
        np.testing.assert_allclose(kernel_eval(k, 0.0, x), np.exp(-x**2 / 2))
        assert kernel_eval(k, 0.7, 0.0) == 1.0

    def test_cheb_smooth_endpoints(self):
        k = KernelSpec("cheb-smooth")
        assert kernel_eval(k, 0.3, 1.0) == 0.0 and kernel_eval(k, 0.3, -1.0) == 0.0

    def test_registry_formulas(self):
        t, x = 0.4, np.linspace(-1, 1, 5)
        np.testing.assert_allclose(kernel_eval(KernelSpec("gauss-poly"), t, x), (1 + t * x**2) * np.exp(-x**2 / 2))
        np.testing.assert_allclose(kernel_eval(KernelSpec("cheb-cos"), t, x), np.cos(t + x))

    def test_unknown(self):
        with pytest.raises(UnknownKernel):
            KernelSpec("nope")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError):
            KernelSpec("gauss-cos", {"width": 2.0})

    def test_domain_mismatch(self):
        with pytest.raises(ValueError):
            KernelSpec("gauss-cos").check_basis(CHEB1)
        with pytest.raises(ValueError):
            KernelSpec("cheb-cos", domain="real")

    @pytest.mark.parametrize("name", REGISTRY_KERNELS)
    def test_analytic_derivatives(self, name):
        from subgauss_ortho.numerics import derivative
        k = KernelSpec(name)
        x = np.linspace(-0.9, 0.9, 7)
        for t in (0.0, 0.6):
            d1 = k.kernel.df(t, x, **k.params)
            d2 = k.kernel.d2f(t, x, **k.params)
            np.testing.assert_allclose(d1, derivative(lambda v: kernel_eval(k, t, v), x, 1), atol=1e-7)
            np.testing.assert_allclose(d2, derivative(lambda v: kernel_eval(k, t, v), x, 2), atol=1e-5)


class TestCoefficients:
    def test_reproduces_basis_function(self):
        k = KernelSpec("hermite-function", {"order": 1.0})
        assert compute_coefficient(k, HERMITE, 1, 0.0) == pytest.approx(1.0, abs=1e-9)
        for j in (0, 2, 3):
            assert abs(compute_coefficient(k, HERMITE, j, 0.0)) <= 1e-9

    def test_odd_vanish(self):
        k = KernelSpec("gauss-cos")
        for j in (1, 3, 5):
            assert abs(compute_coefficient(k, HERMITE, j, 0.0)) <= 1e-10

    def test_leading_oracle(self):
        k = KernelSpec("gauss-cos")
        assert compute_coefficient(k, HERMITE, 0, 0.0) == pytest.approx(A0_GAUSS_COS, rel=1e-12)
        fine = compute_coefficient(k, HERMITE, 0, 0.0, QuadSpec(rel_tol=1e-12))
        coarse = compute_coefficient(k, HERMITE, 0, 0.0, QuadSpec(rel_tol=1e-8))
        assert abs(fine - coarse) <= 1e-8 * abs(fine)

    @pytest.mark.parametrize("name,basis,j,t", [
        ("cheb-cos", CHEB1, 3, 0.4), ("cheb-smooth", CHEB2, 5, 0.9), ("gauss-poly", HERMITE, 6, 0.5),
    ])
    def test_against_scipy(self, name, basis, j, t):
        k = KernelSpec(name)
        lo, hi = (-12.0, 12.0) if basis is HERMITE else (-1.0, 1.0)
        ref, _ = sp_integrate.quad(lambda x: kernel_eval(k, t, x) * basis_functions(basis, j, x)[j],
                                   lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
        assert compute_coefficient(k, basis, j, t) == pytest.approx(ref, rel=1e-9, abs=1e-13)

    @pytest.mark.parametrize("name,basis", [("gauss-cos", HERMITE), ("gauss-poly", HERMITE),
                                            ("cheb-smooth", CHEB1), ("cheb-cos", CHEB2)])
    def test_matrix_matches_adaptive(self, name, basis):
        k = KernelSpec(name)
        t = small_grid(5).t_points
        A = coefficient_matrix(k, basis, 12, t)
        for j in (0, 5, 12):
            for i in (0, 4):
                assert A[j, i] == pytest.approx(compute_coefficient(k, basis, j, t[i]), rel=1e-9, abs=1e-12)


class TestBuildTable:
    def test_exact(self):
        tab = build_table(KernelSpec("gauss-cos"), HERMITE, 10, small_grid())
        assert np.all(tab.delta == 0)
        assert tab.a.shape == (11, 9)

    def test_round(self):
        tab = build_table(KernelSpec("gauss-cos"), HERMITE, 10, small_grid(), approx_scheme=ApproxScheme("round", digits=3))
        assert tab.delta.max() <= 5e-4 + 1e-15

    def test_coarse(self):
        tab = build_table(KernelSpec("cheb-smooth"), CHEB1, 10, small_grid(),
                          approx_scheme=ApproxScheme("coarse-quad", tol=1e-3))
        assert tab.delta.max() <= 1e-2

    def test_perturb_reproducible(self):
        s = ApproxScheme("perturb", seed=7, amplitude=1e-4)
        a = build_table(KernelSpec("gauss-cos"), HERMITE, 6, small_grid(), approx_scheme=s)
        b = build_table(KernelSpec("gauss-cos"), HERMITE, 6, small_grid(), approx_scheme=s)
        np.testing.assert_array_equal(a.a_hat, b.a_hat)
        assert 0 < a.delta.max() <= 1e-4

    def test_delta_consistency(self):
        tab = build_table(KernelSpec("cheb-cos"), CHEB2, 8, small_grid(),
                          approx_scheme=ApproxScheme("perturb", amplitude=1e-3))
        assert np.array_equal(tab.delta, np.abs(tab.a - tab.a_hat))

    def test_table_validation(self):
        tab = build_table(KernelSpec("gauss-cos"), HERMITE, 3, small_grid())
        with pytest.raises(ValueError):
            CoefficientTable(HERMITE, tab.t_grid, 3, tab.a.copy(), tab.a_hat.copy(), tab.delta + 1.0, tab.f_norm_sq)
        bad = tab.a.copy()
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            CoefficientTable(HERMITE, tab.t_grid, 3, bad, bad.copy(), np.zeros_like(bad), tab.f_norm_sq)

    def test_table_read_only(self):
        tab = build_table(KernelSpec("gauss-cos"), HERMITE, 3, small_grid())
        with pytest.raises(ValueError):
            tab.a[0, 0] = 1.0

    def test_rows_order(self):
        tab = build_table(KernelSpec("gauss-cos"), HERMITE, 2, small_grid(3))
        rows = list(tab.rows())
        assert len(rows) == 9 and rows[0][0] == 0 and rows[3][0] == 1

    def test_scheme_validation(self):
        with pytest.raises(ValueError):
            ApproxScheme("other")
        with pytest.raises(ValueError):
            build_table(KernelSpec("gauss-cos"), HERMITE, 0, small_grid())


class TestZf:
    def test_quarter_gaussian(self):
        k = KernelSpec("gauss-quarter")
        assert zf_eval(k, 0.0, 0.0) == pytest.approx(1.0)
        assert zf_eval(k, 0.0, 1.0) == pytest.approx(0.0, abs=1e-15)
        assert zf_energy(k, 0.0) == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-10)

    def test_zero(self):
        k = KernelSpec("zero")
        assert zf_eval(k, 0.3, 1.2) == 0.0
        assert zf_energy(k, 0.3) == 0.0

    def test_homogeneous(self):
        k1, k3 = KernelSpec("gauss-cos"), KernelSpec("gauss-cos", {"scale": 3.0})
        assert zf_energy(k3, 0.5) == pytest.approx(9 * zf_energy(k1, 0.5), rel=1e-10)

    def test_gauss_cos_oracle(self):
        assert zf_energy(KernelSpec("gauss-cos"), 0.0) == pytest.approx(ZF_GAUSS_COS_T0, rel=1e-10)

    def test_finite_difference_fallback(self):
        exact = zf_energy(KernelSpec("gauss-cos"), 0.5)
        fd = zf_energy(KernelSpec("gauss-cos", use_analytic_derivs=False), 0.5)
        assert fd == pytest.approx(exact, rel=1e-5)

    def test_interval_kernel_rejected(self):
        with pytest.raises(ValueError):
            zf_energy(KernelSpec("cheb-cos"), 0.0)

    @pytest.mark.parametrize("name", ["gauss-cos", "gauss-poly"])
    def test_coefficient_decay(self, name):
        k = KernelSpec(name)
        grid = TimeGrid.uniform(1.0, 33)
        tab = build_table(k, HERMITE, 40, grid)
        zf = zf_energy(k, grid.t_points)
        j = np.arange(41)[:, None]
        assert np.all(np.abs(tab.a) <= np.sqrt(zf[None, :] / ((j + 1) * (j + 2))) + 1e-8)


class TestCorrelation:
    def test_single_term(self):
        k = KernelSpec("hermite-function", {"order": 2.0})
        tab = build_table(k, HERMITE, 6, small_grid(3))
        for K in (2, 4, 6):
            assert correlation_residual(tab, k, 0.5, 0.5, K) <= 1e-9

    def test_residual_decreases(self):
        k = KernelSpec("gauss-cos")
        tab = build_table(k, HERMITE, 64, small_grid(5))
        assert correlation_residual(tab, k, 0.5, 0.5, 64) < correlation_residual(tab, k, 0.5, 0.5, 8)

    def test_residual_monotone(self):
        k = KernelSpec("gauss-poly")
        tab = build_table(k, HERMITE, 40, small_grid(5))
        r = [correlation_residual(tab, k, 0.25, 0.75, K) for K in range(0, 41, 2)]
        assert all(b <= a + 1e-9 for a, b in zip(r, r[1:]))

    def test_bessel(self):
        k = KernelSpec("gauss-poly")
        tab = build_table(k, HERMITE, 60, small_grid())
        assert np.all(bessel_partial_sums(tab) <= kernel_energy(k, tab.t_grid.t_points)[None, :] + 1e-9)

    def test_off_grid(self):
        k = KernelSpec("gauss-cos")
        tab = build_table(k, HERMITE, 4, small_grid(3))
        with pytest.raises(ValueError):
            correlation_residual(tab, k, 0.3, 0.5, 2)

    def test_energy_matches_hermite_norm(self):
        k = KernelSpec("hermite-function", {"order": 7.0})
        assert kernel_energy(k, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert hermite_function(7, 0.5) == pytest.approx(kernel_eval(k, 0.0, 0.5))


def test_chebyshev_residual_plateau_matches_weight_gap():
    # coefficients are Lebesgue integrals of weighted-orthonormal functions, so the
    # correlation residual levels off at int f(t,l)^2 (1 - sqrt(1 - l^2)) dl
    k = KernelSpec("cheb-smooth")
    grid = TimeGrid.uniform(1.0, 33)
    tab = build_table(k, BasisId.CHEBYSHEV_FIRST, 64, grid, k0="orthonormal")
    gap, _ = sp_integrate.quad(lambda l: float(kernel_eval(k, 0.5, l)) ** 2 * (1 - math.sqrt(1 - l * l)), -1, 1, epsabs=1e-13)
    assert correlation_residual(tab, k, 0.5, 0.5, 64) == pytest.approx(gap, rel=1e-6)
