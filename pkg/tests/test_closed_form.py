import math

import pytest

from poincare_gap import closed_form as cf
from poincare_gap.models import make_cauchy, make_custom, make_exp_power, make_uniform, TailDecay


class TestExpPower:
    def test_bounds(self):
        assert cf.exp_power_gap_bounds(1.0) == (0.25, 0.5)
        assert cf.exp_power_gap_bounds(2.0) == pytest.approx((1.0, 1.0))
        lo, hi = cf.exp_power_gap_bounds(4.0)
        assert lo == pytest.approx(math.sqrt(5) / 2)
        assert hi == pytest.approx(math.sqrt(3))

    def test_bounds_ordered(self):
        for alpha in (1.0, 1.1, 1.5, 1.9, 2.0, 2.5, 3.0, 8.0, 40.0):
            lo, hi = cf.exp_power_gap_bounds(alpha)
            assert lo <= hi

    def test_exact(self):
        assert cf.exp_power_exact(1.0) == 0.25
        assert cf.exp_power_exact(2.0) == 1.0
        assert cf.exp_power_exact(math.inf) == pytest.approx(2.4674011002723395)
        assert cf.exp_power_exact(1.5) is None

    def test_rejects(self):
        with pytest.raises(ValueError):
            cf.exp_power_gap_bounds(0.9)


class TestGaussianWeighted:
    @pytest.mark.parametrize("b, gap", [(0.25, 0.75), (0.5, 0.5), (2.0, 0.125), (0.1, 0.9)])
    def test_values(self, b, gap):
        assert cf.gaussian_weighted_gap(b) == pytest.approx(gap)

    def test_continuous_at_junction(self):
        assert cf.gaussian_weighted_gap(0.5 - 1e-12) == pytest.approx(cf.gaussian_weighted_gap(0.5))

    def test_regime_labels(self):
        assert "both" in cf.gaussian_weighted_theorem(0.5).regime
        assert cf.gaussian_weighted_theorem(1.0).regime == "b>=1/2"


class TestCauchy:
    @pytest.mark.parametrize("beta, gap", [(2.0, 2.0), (1.0, 0.25), (1.5, 1.0), (0.75, 0.0625)])
    def test_values(self, beta, gap):
        assert cf.cauchy_gap(beta) == pytest.approx(gap)

    def test_bl(self):
        assert cf.cauchy_bl_gap(2.0) == pytest.approx(2 / 3)
        assert cf.cauchy_bl_gap(10.0) == pytest.approx(18 / 19)
        assert cf.cauchy_bl_gap(1e9) == pytest.approx(1.0)

    def test_rejects(self):
        with pytest.raises(ValueError):
            cf.cauchy_gap(0.5)
        with pytest.raises(ValueError):
            cf.cauchy_bl_gap(1.5)


class TestBrascampLieb:
    def test_family(self):
        assert cf.brascamp_lieb_gaussian(0.5) == (1.0, 0.0)
        assert cf.brascamp_lieb_gaussian(0.0) == (0.5, 0.5)
        const, b = cf.brascamp_lieb_gaussian(0.25)
        assert (const, b) == (0.75, 0.25)
        assert cf.gaussian_weighted_gap(b) == const

    def test_rejects(self):
        with pytest.raises(ValueError):
            cf.brascamp_lieb_gaussian(0.7)


class TestRayleighAndPoisson:
    def test_linear(self):
        assert cf.rayleigh_linear_exp_power(2.0) == pytest.approx(1.0)
        assert cf.rayleigh_linear_exp_power(1.0) == pytest.approx(0.5)
        assert cf.rayleigh_linear_exp_power(4.0) == pytest.approx(
            4 ** -0.5 * math.gamma(0.25) / math.gamma(0.75))

    def test_poisson(self):
        assert cf.poisson_lower_exp_power(2.0) == pytest.approx(1.0)
        assert cf.poisson_lower_exp_power(3.0) == pytest.approx(3 ** (1 / 3) / math.gamma(2 / 3))
        assert cf.poisson_lower_exp_power(4.0) == pytest.approx(2 / math.sqrt(math.pi))

    def test_poisson_dominates_theorem_lower(self):
        # the theorem's lower bound is this value weakened by a Gamma-ratio inequality
        for k in range(0, 141):
            alpha = 2.0 + 0.1 * k
            assert cf.poisson_lower_exp_power(alpha) >= cf.exp_power_gap_bounds(alpha)[0] * (1 - 1e-12)

    def test_poisson_rejects_light_alpha(self):
        with pytest.raises(ValueError):
            cf.poisson_lower_exp_power(1.5)


def test_theorem_for():
    assert cf.theorem_for(make_cauchy(2.0)).value == 2.0
    assert cf.theorem_for(make_exp_power(1.5)).value is None
    assert cf.theorem_for(make_uniform()).value == pytest.approx(math.pi ** 2 / 4)
    custom = make_custom(lambda x: x * x / 2, lambda x: x, lambda x: 1 + 0 * x,
                         lambda x: 1 + 0 * x, lambda x: 0 * x, TailDecay("exp-power", 2))
    assert cf.theorem_for(custom) is None


def test_theorem_value_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        cf.TheoremValue("x", 1.0, 2.0, 1.0, "r")
