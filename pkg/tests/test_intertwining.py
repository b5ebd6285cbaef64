import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poincare_gap import closed_form as cf
from poincare_gap import intertwining as it
from poincare_gap.models import (
    EstimateKind,
    TailDecay,
    make_cauchy,
    make_cauchy_bl,
    make_custom,
    make_exp_power,
    make_gaussian_weighted,
    make_uniform,
)

X = np.concatenate([-np.logspace(-3, 2, 60)[::-1], np.logspace(-3, 2, 60)])


class TestVFormula:
    @pytest.mark.parametrize("alpha, eps", [(1.5, 0.25), (3.0, 0.4), (1.2, 0.0)])
    def test_exp_power(self, alpha, eps):
        ax = np.abs(X)
        expected = (1 - eps) * ((alpha - 1) * ax ** (alpha - 2) + eps * ax ** (2 * (alpha - 1)))
        np.testing.assert_allclose(it.v_f_eps(make_exp_power(alpha), eps, X), expected, rtol=1e-12)

    def test_gaussian_is_one_at_zero_eps(self):
        np.testing.assert_allclose(it.v_f_eps(make_exp_power(2), 0.0, X), 1.0)

    @pytest.mark.parametrize("b, eps", [(0.5, 0.3), (2.0, 0.9)])
    def test_gaussian_weighted(self, b, eps):
        expected = (1 - eps) * (1 + eps * X ** 2) / (1 + b * X ** 2)
        np.testing.assert_allclose(it.v_f_eps(make_gaussian_weighted(b), eps, X), expected, rtol=1e-12)
        assert it.v_f_eps(make_gaussian_weighted(b), eps, 0.0) == pytest.approx(1 - eps)

    @pytest.mark.parametrize("beta, eps", [(1.0, -0.25), (2.0, 0.5), (0.75, -0.4)])
    def test_cauchy_shifted_parameter(self, beta, eps):
        expected = 2 * (beta - eps - 1) * (1 + (2 * eps + 1) * X ** 2) / (1 + X ** 2)
        np.testing.assert_allclose(it.v_f_eps(make_cauchy(beta), eps, X), expected, rtol=1e-11)

    def test_singular_origin_rejected(self):
        with pytest.raises(ValueError):
            it.v_f_eps(make_exp_power(1.5), 0.25, [0.0, 1.0])
        it.v_f_eps(make_exp_power(2.0), 0.25, 0.0)

    @pytest.mark.parametrize("model, eps", [
        (make_exp_power(3.0), 0.2), (make_gaussian_weighted(1.0), 0.4), (make_cauchy(2.0), 0.1),
        (make_cauchy_bl(3.0), 0.5),
    ], ids=lambda v: getattr(v, "label", str(v)))
    def test_explicit_family_agrees(self, model, eps):
        # the same f' written out by hand, with f''' by finite differences
        e = it.generic_epsilon(model, eps)
        v0, v1 = model.potential_v, model.potential_v_prime
        s0, s1 = model.weight_sq, model.weight_sq_prime
        h = 1e-4

        def fp(_, x):
            return np.exp(e * v0(x)) / s0(x)

        def fpp(_, x):
            return (e * v1(x) * s0(x) - s1(x)) * np.exp(e * v0(x)) / s0(x) ** 2

        def fppp(_, x):
            step = h * np.maximum(1.0, np.abs(x))
            return (fpp(_, x + step) - fpp(_, x - step)) / (2 * step)

        fam = it.CandidateFamily(it.CandidateKind.EXPLICIT_F_PRIME, (0.0, 1.0),
                                 f_prime=fp, f_second=fpp, f_third=fppp)
        x = np.linspace(-4, 4, 33)
        np.testing.assert_allclose(it.v_f_explicit(model, fam, eps, x), it.v_f_eps(model, eps, x),
                                   rtol=1e-5, atol=1e-4)


class TestInfimum:
    def test_exp_power_optimum(self):
        for alpha in (1.2, 1.5, 1.8):
            res = it.inf_v_f(make_exp_power(alpha), (2 - alpha) / 2)
            assert res.value == pytest.approx(alpha ** 2 / 4, rel=1e-12)
            assert res.certified
            assert not res.flags

    @pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
    def test_gaussian_weighted_piecewise(self, b):
        for eps in np.linspace(0.05, 0.95, 19):
            expected = eps * (1 - eps) / b if eps <= b else 1 - eps
            res = it.inf_v_f(make_gaussian_weighted(b), eps)
            assert res.grid_value == pytest.approx(expected, rel=1e-8, abs=1e-8)

    @pytest.mark.parametrize("beta", [0.75, 1.0, 1.5, 3.0])
    def test_cauchy_piecewise(self, beta):
        for eps in np.linspace(-0.45, beta - 1.05, 13):
            res = it.inf_v_f(make_cauchy(beta), eps)
            expected = 2 * (beta - eps - 1) * min(1.0, 2 * eps + 1)
            assert res.grid_value == pytest.approx(expected, rel=1e-8, abs=1e-8)
            assert not res.flags

    def test_cauchy_negative_branch_example(self):
        beta, eps = 1.0, -0.25
        assert it.inf_v_f(make_cauchy(beta), eps).value == pytest.approx(2 * (beta - eps - 1) * (2 * eps + 1))

    @pytest.mark.parametrize("alpha", [1.0, 1.3, 1.7, 2.0])
    @settings(max_examples=15, deadline=None)
    @given(eps=st.floats(0.01, 0.99))
    def test_exp_power_grid_matches_analytic(self, alpha, eps):
        res = it.inf_v_f(make_exp_power(alpha), eps)
        assert "grid-analytic mismatch" not in res.flags

    def test_no_bound(self):
        est = it.inf_v_f(make_exp_power(4.0), 0.3).estimate()
        assert est.kind is EstimateKind.NO_BOUND
        assert est.value == 0.0

    def test_custom_is_not_certified(self):
        m = make_custom(lambda x: x ** 4 / 4 + x * x / 2, lambda x: x ** 3 + x, lambda x: 3 * x * x + 1,
                        lambda x: 1 + 0 * x, lambda x: 0 * x, TailDecay("exp-power", 4))
        res = it.inf_v_f(m, 0.0)
        assert not res.certified
        assert res.value == pytest.approx(1.0)
        est = res.estimate()
        assert est.kind is EstimateKind.NUMERICAL
        assert "grid infimum" in est.method

    def test_nan_rejected(self):
        m = make_custom(lambda x: x * x / 2, lambda x: x, lambda x: np.where(x > 1, np.nan, 1.0),
                        lambda x: 1 + 0 * x, lambda x: 0 * x, TailDecay("exp-power", 2))
        with pytest.raises(ValueError, match="not finite"):
            it.inf_v_f(m, 0.0)


class TestSoundness:
    @pytest.mark.parametrize("model", [
        make_exp_power(1.0), make_exp_power(1.5), make_exp_power(2.0), make_exp_power(3.0),
        make_gaussian_weighted(0.25), make_gaussian_weighted(0.5), make_gaussian_weighted(2.0),
        make_cauchy(0.75), make_cauchy(1.5), make_cauchy(3.0), make_cauchy_bl(2.0), make_cauchy_bl(10.0),
        make_uniform(),
    ], ids=lambda m: m.label)
    def test_never_exceeds_gap(self, model):
        thm = cf.theorem_for(model)
        gap = thm.value if thm.value is not None else thm.upper
        lo, hi = it.default_family(model).epsilon_range
        for eps in np.linspace(lo, hi, 23)[1:-1]:
            assert it.inf_v_f(model, eps).value <= gap + 1e-8


class TestOptimize:
    def test_gaussian_weighted(self):
        eps, est = it.optimize_epsilon(make_gaussian_weighted(1.0))
        assert eps == pytest.approx(0.5, abs=1e-4)
        assert est.value == pytest.approx(0.25, rel=1e-6)
        assert est.kind is EstimateKind.LOWER_BOUND

    def test_cauchy(self):
        eps, est = it.optimize_epsilon(make_cauchy(1.0))
        assert eps == pytest.approx(-0.25, abs=1e-4)
        assert est.value == pytest.approx(0.25, rel=1e-6)

    def test_exp_power(self):
        eps, est = it.optimize_epsilon(make_exp_power(1.5))
        assert eps == pytest.approx(0.25, abs=1e-4)
        assert est.value == pytest.approx(0.5625, rel=1e-6)

    def test_cauchy_bl_large_beta(self):
        eps, est = it.optimize_epsilon(make_cauchy_bl(2.0))
        assert eps == pytest.approx(0.5, abs=1e-4)
        assert est.value == pytest.approx(cf.cauchy_bl_gap(2.0), rel=1e-6)

    def test_restricted_range(self):
        eps, est = it.optimize_epsilon(make_gaussian_weighted(1.0), epsilon_range=(0.6, 0.9))
        assert eps == pytest.approx(0.6, abs=1e-4)
        assert est.value == pytest.approx(0.4 * 0.6, rel=1e-6)

    def test_all_negative_is_no_bound(self):
        _, est = it.optimize_epsilon(make_exp_power(3.0))
        assert est.kind is EstimateKind.NO_BOUND

    def test_empty_range(self):
        with pytest.raises(ValueError):
            it.CandidateFamily(it.CandidateKind.EXP_OF_POTENTIAL, (1.0, 0.0))


class TestPoisson:
    @pytest.mark.parametrize("alpha", [2.0, 2.5, 3.0, 4.0, 8.0])
    def test_closed_form(self, alpha):
        est = it.poisson_lower_bound(make_exp_power(alpha))
        assert est.value == pytest.approx(cf.poisson_lower_exp_power(alpha), rel=1e-6)
        assert not est.flags

    def test_examples(self):
        assert it.poisson_lower_bound(make_exp_power(2.0)).value == pytest.approx(1.0, rel=1e-6)
        assert it.poisson_lower_bound(make_exp_power(3.0)).value == pytest.approx(1.0650, abs=1e-4)

    def test_argmax_at_origin(self):
        x = np.linspace(-3, 3, 61)
        fp = it.poisson_f_prime(make_exp_power(2.0), x)
        np.testing.assert_allclose(fp, 1.0, rtol=1e-9)
        assert it.PoissonProfile(x, fp).argmax == 0.0
        fp3 = it.poisson_f_prime(make_exp_power(3.0), x)
        assert x[int(np.argmax(fp3))] == 0.0

    def test_rejects(self):
        with pytest.raises(ValueError):
            it.poisson_lower_bound(make_exp_power(1.5))
        with pytest.raises(ValueError):
            it.poisson_lower_bound(make_cauchy(2.0))

    def test_best_lower_uses_poisson(self):
        eps, est = it.best_lower(make_exp_power(4.0))
        assert math.isnan(eps)
        assert est.value == pytest.approx(2 / math.sqrt(math.pi), rel=1e-6)


class TestBrascampLieb:
    def test_positive_range(self):
        for gamma in (0.0, 0.25, 0.5):
            w = it.generalized_brascamp_lieb_weight(make_exp_power(2.0), gamma)
            assert w.positive
            np.testing.assert_allclose(w.weight(w.grid), 4 * ((0.25 - gamma ** 2) * w.grid ** 2 + gamma + 0.5))

    def test_classical_case(self):
        w = it.generalized_brascamp_lieb_weight(make_exp_power(2.0), 0.5)
        np.testing.assert_allclose(w.weight(w.grid), 4.0)

    def test_positivity_fails(self):
        w = it.generalized_brascamp_lieb_weight(make_exp_power(2.0), 0.7)
        assert not w.positive
        assert np.all(w.negative_points ** 2 >= 1.2 / 0.24 - 1e-9)
        assert "no inequality" in w.statement()

    def test_requires_unit_weight(self):
        with pytest.raises(ValueError):
            it.generalized_brascamp_lieb_weight(make_cauchy(2.0), 0.25)

    def test_eigenfunction_residual(self):
        # V = x^2/2 + x^4/12, sigma^2 = 1/V''
        m = make_custom(lambda x: x * x / 2 + x ** 4 / 12, lambda x: x + x ** 3 / 3, lambda x: 1 + x * x,
                        lambda x: 1 / (1 + x * x), lambda x: -2 * x / (1 + x * x) ** 2,
                        TailDecay("exp-power", 4))
        assert it.brascamp_lieb_residual(m, np.linspace(-5, 5, 101)) <= 1e-6
