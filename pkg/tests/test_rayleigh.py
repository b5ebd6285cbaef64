import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from poincare_gap import closed_form as cf
from poincare_gap import quadrature as q
from poincare_gap import rayleigh as r
from poincare_gap.models import (
    EstimateKind,
    make_cauchy,
    make_cauchy_bl,
    make_exp_power,
    make_gaussian_weighted,
    make_uniform,
)


class TestTrialFunctions:
    @pytest.mark.parametrize("tf", [
        r.linear(), r.gaussian_trial(0.3), r.gaussian_eigenfunction(0.25), r.cauchy_trial(-0.4),
        r.cauchy_trial(0.7), r.exp_quadratic_trial(0.2), r.sine_trial(),
    ], ids=lambda t: t.label)
    def test_derivatives(self, tf):
        assert r.derivative_mismatch(tf, np.linspace(-3, 3, 31)) < 1e-8

    def test_not_collected(self):
        assert r.TestFunction.__test__ is False


class TestQuotient:
    def test_gaussian_linear(self):
        est = r.rayleigh_quotient(make_exp_power(2), r.linear())
        assert est.value == pytest.approx(1.0, rel=1e-10)
        assert est.kind is EstimateKind.UPPER_BOUND

    def test_cauchy_linear(self):
        assert r.rayleigh_quotient(make_cauchy(2), r.linear()).value == pytest.approx(2.0, rel=1e-8)

    def test_matches_closed_form_linear(self):
        for alpha in (1.0, 1.5, 3.0, 4.0):
            est = r.rayleigh_quotient(make_exp_power(alpha), r.linear())
            assert est.value == pytest.approx(cf.rayleigh_linear_exp_power(alpha), rel=1e-9)

    def test_eigenfunction_is_exact(self):
        for b in (0.1, 0.25, 0.4):
            est = r.rayleigh_quotient(make_gaussian_weighted(b), r.gaussian_eigenfunction(b))
            assert est.value == pytest.approx(1 - b, rel=1e-9)

    def test_sine_on_interval(self):
        est = r.rayleigh_quotient(make_uniform(), r.sine_trial())
        assert est.value == pytest.approx(math.pi ** 2 / 4, rel=1e-12)

    def test_constant_is_degenerate(self):
        const = r.TestFunction(lambda x: 0 * x + 1, lambda x: 0 * x, "1")
        with pytest.raises(r.DegenerateTestFunction):
            r.rayleigh_quotient(make_exp_power(2), const)

    @pytest.mark.parametrize("model", [make_exp_power(1.3), make_cauchy(0.8), make_cauchy_bl(3.0),
                                       make_gaussian_weighted(2.0)], ids=lambda m: m.label)
    def test_dominates_exact_gap(self, model):
        # a bounded trial keeps the variance finite for heavy tails
        trial = r.TestFunction(np.arctan, lambda x: 1 / (1 + x * x), "arctan")
        est = r.rayleigh_quotient(model, trial)
        thm = cf.theorem_for(model)
        floor = thm.value if thm.value is not None else thm.lower
        assert est.value >= floor * (1 - 1e-9)


class TestGaussianFamily:
    def test_example_eps_small(self):
        assert r.gaussian_exact_quotient(1.0, 0.1) <= 0.3925
        assert r.gaussian_displayed_bound(1.0, 0.1) == pytest.approx(0.3925)

    def test_example_half(self):
        # 0.0625 + 1.5 * 0.5
        assert r.gaussian_displayed_bound(1.0, 0.5) == pytest.approx(0.8125)

    @settings(max_examples=100)
    @given(b=st.floats(0.5, 20.0), eps=st.floats(1e-6, 0.999))
    def test_displayed_dominates_exact(self, b, eps):
        assert r.gaussian_displayed_bound(b, eps) >= r.gaussian_exact_quotient(b, eps) * (1 - 1e-12)

    @pytest.mark.parametrize("b, eps", [(0.5, 0.3), (1.0, 0.1), (1.0, 0.5), (4.0, 0.8)])
    def test_exact_against_scipy(self, b, eps):
        # mu is Gaussian, sigma^2 = 1/(1 + b x^2); the sqrt(2 pi) cancels in the ratio
        k = (1 - eps) / 4
        en = integrate.quad(lambda x: (1 + 2 * k * x * x) ** 2 * math.exp(-eps * x * x / 2)
                            / (1 + b * x * x), -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
        var = integrate.quad(lambda x: x * x * math.exp(-eps * x * x / 2),
                             -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
        assert r.gaussian_exact_quotient(b, eps) == pytest.approx(en / var, rel=1e-9)

    def test_scan(self):
        scan = r.gaussian_upper_family(1.0, [1e-4, 0.1, 0.3, 0.5, 0.9])
        finite = ~np.isnan(scan.quadrature)
        np.testing.assert_allclose(scan.quadrature[finite], scan.exact[finite], rtol=1e-6)
        assert scan.best.value >= 0.25
        assert scan.best.value == pytest.approx(0.25, abs=2e-4)
        assert scan.limit_analytic == 0.25

    @pytest.mark.parametrize("b, grid", [(0.3, [0.1]), (1.0, []), (1.0, [0.0]), (1.0, [1.0])])
    def test_rejects(self, b, grid):
        with pytest.raises(ValueError):
            r.gaussian_upper_family(b, grid)


class TestCauchyFamily:
    def test_example(self):
        assert r.cauchy_upper_bound(1.0, -0.5) == pytest.approx(0.75)

    def test_matches_quadrature(self):
        for beta, eps in ((1.0, -0.5), (1.25, -0.3), (1.5, -0.2)):
            est = r.rayleigh_quotient(make_cauchy(beta), r.cauchy_trial(eps))
            assert est.value == pytest.approx(r.cauchy_upper_bound(beta, eps), rel=1e-8)

    def test_limit(self):
        beta = 1.0
        critical = (2 * beta - 3) / 4
        scan = r.cauchy_upper_family(beta, critical - np.geomspace(1e-7, 1, 15))
        assert scan.limit_analytic == 0.25
        assert scan.limit_extrapolated == pytest.approx(0.25, abs=1e-6)
        assert scan.best.value == pytest.approx(0.25, abs=1e-6)
        assert np.all(scan.analytic >= 0.25)

    def test_rejects_non_integrable(self):
        with pytest.raises(ValueError, match="square integrable"):
            r.cauchy_upper_family(1.0, [-0.2])
        with pytest.raises(ValueError):
            r.cauchy_upper_family(2.0, [-1.0])


class TestWeightOptimality:
    def test_variance_formula(self):
        for eps in (0.1, 0.3, 0.45):
            var = q.variance(make_exp_power(2), r.exp_quadratic_trial(eps))
            assert var == pytest.approx(r.gaussian_power_weight_variance(eps), rel=1e-9)

    @pytest.mark.parametrize("a, eps", [(1.2, 0.2), (1.4, 0.3), (1.6, 0.2), (2.5, 0.35)])
    def test_exact_energy_against_quadrature(self, a, eps):
        en = q.energy(r.gaussian_power_weight_model(a), r.exp_quadratic_trial(eps))
        assert r.gaussian_power_weight_energy_exact(a, eps) == pytest.approx(en, rel=1e-8)

    @pytest.mark.parametrize("a, eps", [(1.01, 0.25), (1.2, 0.2), (1.4, 0.45)])
    def test_displayed_energy_dominates(self, a, eps):
        assert r.gaussian_power_weight_energy(a, eps) >= r.gaussian_power_weight_energy_exact(a, eps)

    def test_finite_near_one(self):
        est = r.weight_optimality_gaussian(1.01, [0.25])[0]
        assert math.isfinite(est.value) and est.value > 0

    @pytest.mark.parametrize("a", [1.2, 2.0])
    def test_gaussian_collapses(self, a):
        eps = 0.5 - np.logspace(-2, -12, 11)
        vals = [e.value for e in r.weight_optimality_gaussian(a, eps)]
        assert np.all(np.diff(vals) < 0)
        assert vals[-1] < 1e-2

    def test_cauchy_collapses(self):
        beta, b = 2.0, 0.5
        critical = beta / 2 - 0.25
        eps = critical - np.logspace(-2, -12, 11)
        vals = [e.value for e in r.weight_optimality_cauchy(beta, b, eps)]
        assert np.all(np.diff(vals) < 0)
        assert vals[-1] < 1e-2

    def test_cauchy_matches_quadrature(self):
        beta, b, eps = 2.0, 0.5, 0.3
        tf = r.TestFunction(lambda x: (1 + x * x) ** eps,
                            lambda x: 2 * eps * x * (1 + x * x) ** (eps - 1), "(1+x^2)^eps")
        model = r.cauchy_power_weight_model(beta, b)
        ratio = q.energy(model, tf) / q.variance(model, tf)
        assert r.weight_optimality_cauchy(beta, b, [eps])[0].value == pytest.approx(ratio, rel=1e-7)

    @pytest.mark.parametrize("a, grid", [(1.0, [0.2]), (2.5 - 1.0, [0.5]), (2.5, [0.2]), (1.2, [0.0])])
    def test_gaussian_rejects(self, a, grid):
        with pytest.raises(ValueError):
            r.weight_optimality_gaussian(a, grid)

    @pytest.mark.parametrize("beta, b, grid", [(2.0, 1.0, [0.1]), (0.5, 0.5, [0.1]), (2.0, 0.5, [0.75])])
    def test_cauchy_rejects(self, beta, b, grid):
        with pytest.raises(ValueError):
            r.weight_optimality_cauchy(beta, b, grid)


class TestBestUpper:
    @pytest.mark.parametrize("model", [
        make_exp_power(2), make_uniform(), make_gaussian_weighted(0.25), make_gaussian_weighted(2.0),
        make_cauchy(1.0), make_cauchy(3.0), make_cauchy_bl(2.0),
    ], ids=lambda m: m.label)
    def test_tight(self, model):
        est = r.best_upper(model)
        thm = cf.theorem_for(model)
        assert est.kind is EstimateKind.UPPER_BOUND
        assert est.value >= thm.value * (1 - 1e-9)
        assert est.value == pytest.approx(thm.value, rel=2e-2)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 3.0, 4.0])
    def test_exp_power_linear(self, alpha):
        # f(x) = x is not an eigenfunction away from alpha = 2, so only the sandwich holds
        est = r.best_upper(make_exp_power(alpha))
        lo, hi = cf.exp_power_gap_bounds(alpha)
        assert lo <= est.value <= hi * (1 + 1e-12)
