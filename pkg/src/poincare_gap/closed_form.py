"""Closed-form gaps and bounds for the built-in families."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .special_functions import log_gamma

INFINITE_ALPHA = math.inf  # the uniform law on [-1, 1]


@dataclass(frozen=True)
class TheoremValue:
    model_tag: str
    param: float
    lower: float
    upper: float
    regime: str
    exact: float | None = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def value(self) -> float | None:
        if self.exact is not None:
            return self.exact
        return self.lower if self.lower == self.upper else None


def _check_alpha(alpha):
    if not alpha >= 1.0 or math.isinf(alpha):
        raise ValueError(f"alpha must satisfy 1 <= alpha < inf, got {alpha}")


def exp_power_gap_bounds(alpha: float) -> tuple[float, float]:
    """Two-sided estimate of the gap of the exponential power law."""
    _check_alpha(alpha)
    if alpha <= 2.0:
        return alpha * alpha / 4.0, 2.0 ** (1.0 - 2.0 / alpha)
    return (2.0 * (1.0 + alpha) ** (1.0 - 2.0 / alpha) / alpha,
            3.0 ** (1.0 - 2.0 / alpha))


def exp_power_exact(alpha: float) -> float | None:
    if alpha == 1.0:
        return 0.25
    if alpha == 2.0:
        return 1.0
    if alpha == INFINITE_ALPHA:
        return math.pi ** 2 / 4.0
    return None


def exp_power_theorem(alpha: float) -> TheoremValue:
    if alpha == INFINITE_ALPHA:
        v = exp_power_exact(alpha)
        return TheoremValue("uniform", alpha, v, v, "alpha=inf", v)
    lo, hi = exp_power_gap_bounds(alpha)
    regime = "1<=alpha<=2" if alpha < 2.0 else ("alpha>=2" if alpha > 2.0 else "alpha=2 (both)")
    return TheoremValue("exp-power", alpha, lo, hi, regime, exp_power_exact(alpha))


def gaussian_weighted_gap(b: float) -> float:
    if not b > 0.0:
        raise ValueError(f"b must be positive, got {b}")
    if b < 0.5:
        return 1.0 - b
    return 1.0 / (4.0 * b)


def gaussian_weighted_theorem(b: float) -> TheoremValue:
    v = gaussian_weighted_gap(b)
    regime = "0<b<1/2" if b < 0.5 else ("b=1/2 (both)" if b == 0.5 else "b>=1/2")
    return TheoremValue("gauss-weighted", b, v, v, regime, v)


def cauchy_gap(beta: float) -> float:
    if not beta > 0.5:
        raise ValueError(f"beta must exceed 1/2, got {beta}")
    if beta > 1.5:
        return 2.0 * (beta - 1.0)
    return (beta - 0.5) ** 2


def cauchy_theorem(beta: float) -> TheoremValue:
    v = cauchy_gap(beta)
    regime = "beta>3/2" if beta > 1.5 else ("beta=3/2 (both)" if beta == 1.5 else "1/2<beta<=3/2")
    return TheoremValue("cauchy", beta, v, v, regime, v)


def cauchy_bl_gap(beta: float) -> float:
    if not beta > 1.5:
        raise ValueError(f"beta must exceed 3/2, got {beta}")
    return 2.0 * (beta - 1.0) / (2.0 * beta - 1.0)


def cauchy_bl_theorem(beta: float) -> TheoremValue:
    v = cauchy_bl_gap(beta)
    return TheoremValue("cauchy-bl", beta, v, v, "beta>3/2", v)


def brascamp_lieb_gaussian(gamma: float) -> tuple[float, float]:
    """(constant, weight parameter b) of the gamma-indexed Gaussian inequality."""
    if not 0.0 <= gamma <= 0.5:
        raise ValueError(f"gamma must lie in [0, 1/2], got {gamma}")
    return gamma + 0.5, 0.5 - gamma


def rayleigh_linear_exp_power(alpha: float) -> float:
    """Rayleigh quotient of ``f(x) = x``: ``alpha^(-2/alpha) Gamma(1/a)/Gamma(3/a)``."""
    _check_alpha(alpha)
    return math.exp(-2.0 / alpha * math.log(alpha)
                    + log_gamma(1.0 / alpha) - log_gamma(3.0 / alpha))


def poisson_lower_exp_power(alpha: float) -> float:
    """``alpha^(1-2/alpha) / Gamma(2/alpha)``, valid for alpha >= 2."""
    if not alpha >= 2.0 or math.isinf(alpha):
        raise ValueError(f"the Poisson-equation bound needs 2 <= alpha < inf, got {alpha}")
    return math.exp((1.0 - 2.0 / alpha) * math.log(alpha) - log_gamma(2.0 / alpha))


def theorem_for(model) -> TheoremValue | None:
    """Closed-form statement for a built-in model, or None for custom models."""
    from .models import Family

    fam, p = model.family, model.param
    if fam is Family.EXP_POWER:
        return exp_power_theorem(p)
    if fam is Family.UNIFORM:
        return exp_power_theorem(INFINITE_ALPHA)
    if fam is Family.GAUSSIAN_WEIGHTED:
        return gaussian_weighted_theorem(p)
    if fam is Family.CAUCHY:
        return cauchy_theorem(p)
    if fam is Family.CAUCHY_BL:
        return cauchy_bl_theorem(p)
    return None
