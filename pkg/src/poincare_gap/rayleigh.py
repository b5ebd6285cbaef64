"""Upper bounds on the gap from Rayleigh quotients of explicit trial functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import mpmath
from scipy.special import erfcx

from . import quadrature
from .models import (
    DiffusionModel,
    EstimateKind,
    GapEstimate,
    TailDecay,
    make_cauchy,
    make_custom,
    make_gaussian_weighted,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .special_functions import log_gamma


class DegenerateTestFunction(ValueError):
    pass


@dataclass(frozen=True)
class TestFunction:
    f: Callable
    f_prime: Callable
    label: str
    epsilon: float | None = None
    f_second: Callable | None = None

    __test__ = False  # not a pytest class


def derivative_mismatch(tf: TestFunction, xs, h_rel: float = 1e-5) -> float:
    """Largest relative gap between ``f'`` and centred differences of ``f``."""
    xs = np.asarray(xs, dtype=float)
    h = h_rel * np.maximum(1.0, np.abs(xs))
    fd = (tf.f(xs + h) - tf.f(xs - h)) / (2.0 * h)
    an = tf.f_prime(xs)
    return float(np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an))))


# ---------------------------------------------------------------------------
# trial families
# ---------------------------------------------------------------------------

def linear() -> TestFunction:
    return TestFunction(
        f=lambda x: np.asarray(x, dtype=float),
        f_prime=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        label="f(x)=x",
        f_second=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    )


def gaussian_trial(eps: float) -> TestFunction:
    """``x exp((1-eps) x^2 / 4)``."""
    k = (1.0 - eps) / 4.0
    return TestFunction(
        f=lambda x: x * np.exp(k * x * x),
        f_prime=lambda x: (1.0 + 2.0 * k * x * x) * np.exp(k * x * x),
        label=f"x*exp((1-eps)x^2/4), eps={eps:g}",
        epsilon=eps,
    )


def gaussian_eigenfunction(b: float) -> TestFunction:
    """``x exp(b x^2 / 2)``: the eigenfunction for ``b < 1/2``."""
    return TestFunction(
        f=lambda x: x * np.exp(0.5 * b * x * x),
        f_prime=lambda x: (1.0 + b * x * x) * np.exp(0.5 * b * x * x),
        label=f"x*exp(b x^2/2), b={b:g}",
    )


def cauchy_trial(eps: float) -> TestFunction:
    """``x (1 + x^2)^eps``."""
    return TestFunction(
        f=lambda x: x * (1.0 + x * x) ** eps,
        f_prime=lambda x: (1.0 + x * x) ** (eps - 1.0) * (1.0 + (1.0 + 2.0 * eps) * x * x),
        label=f"x*(1+x^2)^eps, eps={eps:g}",
        epsilon=eps,
    )


# ---------------------------------------------------------------------------
# quotient
# ---------------------------------------------------------------------------

def rayleigh_quotient(model: DiffusionModel, f: TestFunction,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> GapEstimate:
    """Energy over variance: an upper bound for the gap."""
    z = quadrature.normalizing_constant(model, spec)
    var = quadrature.variance(model, f, spec, z)
    if not var > 1e-14:
        raise DegenerateTestFunction(f"degenerate test function {f.label!r} (variance {var:g})")
    en = quadrature.energy(model, f, spec, z)
    return GapEstimate(float(en / var), EstimateKind.UPPER_BOUND, f"rayleigh {f.label}")


def _extrapolate(eps, vals, target):
    """Quadratic through the three grid points nearest ``target``, evaluated there."""
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals, dtype=float)
    idx = np.argsort(np.abs(eps - target))[:3]
    if idx.size < 3:
        return float(vals[idx[0]])
    coef = np.polyfit(eps[idx] - target, vals[idx], 2)
    return float(coef[-1])


@dataclass
class FamilyScan:
    """Per-epsilon values of a trial family plus its best bound and limit."""

    epsilons: np.ndarray
    analytic: np.ndarray
    exact: np.ndarray
    quadrature: np.ndarray
    best: GapEstimate
    limit_analytic: float
    limit_extrapolated: float
    notes: list[str] = field(default_factory=list)


# Beyond this the trial function outgrows the Gaussian weight too slowly for the
# quadrature to reach its tail inside double-precision range.
_GAUSSIAN_QUADRATURE_MIN_EPS = 0.08


def gaussian_displayed_bound(b: float, eps: float) -> float:
    """``(1-eps)^2/(4b) + (1-eps+b) eps / b``, which dominates the true quotient."""
    return (1.0 - eps) ** 2 / (4.0 * b) + (1.0 - eps + b) * eps / b


def gaussian_exact_quotient(b: float, eps: float) -> float:
    """Exact Rayleigh quotient of ``x exp((1-eps)x^2/4)`` for the weighted Gaussian.

    Reduces every integral to Gaussian moments and
    ``∫ exp(-eps y^2/2) / (1 + b y^2) dy`` which has an ``erfc`` closed form.
    """
    g0 = eps ** -0.5
    g2 = eps ** -1.5
    i0 = math.sqrt(math.pi / (2.0 * b)) * float(erfcx(math.sqrt(eps / (2.0 * b))))
    a = (1.0 - eps) ** 2 / 4.0
    energy = (a * (g2 / b - (g0 - i0) / b ** 2)
              + (1.0 - eps) * (g0 - i0) / b
              + i0)
    return energy * eps ** 1.5


def gaussian_upper_family(b: float, eps_grid: Sequence[float],
                          spec: QuadratureSpec = DEFAULT_SPEC,
                          with_quadrature: bool = True) -> FamilyScan:
    if not b >= 0.5:
        raise ValueError(f"this family targets b >= 1/2, got {b}")
    eps = np.sort(np.asarray(eps_grid, dtype=float))
    if eps.size == 0:
        raise ValueError("empty epsilon grid")
    if np.any((eps <= 0) | (eps >= 1)):
        raise ValueError("epsilon must lie in (0, 1)")
    analytic = np.array([gaussian_displayed_bound(b, e) for e in eps])
    exact = np.array([gaussian_exact_quotient(b, e) for e in eps])
    quad = np.full_like(eps, np.nan)
    model = make_gaussian_weighted(b)
    if with_quadrature:
        for i, e in enumerate(eps):
            if e >= _GAUSSIAN_QUADRATURE_MIN_EPS:
                quad[i] = rayleigh_quotient(model, gaussian_trial(e), spec).value
    i = int(np.argmin(exact))
    best = GapEstimate(float(exact[i]), EstimateKind.UPPER_BOUND,
                       f"rayleigh x*exp((1-eps)x^2/4), eps={eps[i]:g}")
    return FamilyScan(eps, analytic, exact, quad, best,
                      limit_analytic=1.0 / (4.0 * b),
                      limit_extrapolated=_extrapolate(eps, analytic, 0.0))


def cauchy_upper_bound(beta: float, eps: float) -> float:
    """``2(beta-1) + 6 eps^2/(beta - 2 eps)``: the quotient of ``x(1+x^2)^eps``."""
    return 2.0 * (beta - 1.0) + 6.0 * eps * eps / (beta - 2.0 * eps)


def cauchy_upper_family(beta: float, eps_grid: Sequence[float],
                        spec: QuadratureSpec = DEFAULT_SPEC,
                        with_quadrature: bool = True) -> FamilyScan:
    if not 0.5 < beta <= 1.5:
        raise ValueError(f"this family targets 1/2 < beta <= 3/2, got {beta}")
    critical = (2.0 * beta - 3.0) / 4.0
    eps = np.sort(np.asarray(eps_grid, dtype=float))
    if eps.size == 0:
        raise ValueError("empty epsilon grid")
    if np.any(eps >= critical):
        raise ValueError(f"epsilon must stay below (2 beta - 3)/4 = {critical:g} "
                         "for the trial function to be square integrable")
    analytic = np.array([cauchy_upper_bound(beta, e) for e in eps])
    quad = np.full_like(eps, np.nan)
    model = make_cauchy(beta)
    if with_quadrature:
        for i, e in enumerate(eps):
            # the integrand decays like exp(-4 (critical - eps) t) in t = asinh(x)
            if critical - e >= 0.05:
                quad[i] = rayleigh_quotient(model, cauchy_trial(e), spec).value
    i = int(np.argmin(analytic))
    best = GapEstimate(float(analytic[i]), EstimateKind.UPPER_BOUND,
                       f"rayleigh x*(1+x^2)^eps, eps={eps[i]:g}")
    return FamilyScan(eps, analytic, analytic.copy(), quad, best,
                      limit_analytic=(beta - 0.5) ** 2,
                      limit_extrapolated=_extrapolate(eps, analytic, critical))


# ---------------------------------------------------------------------------
# weights that are too strong: the gap collapses
# ---------------------------------------------------------------------------

def gaussian_power_weight_model(a: float) -> DiffusionModel:
    """Standard Gaussian with ``sigma^2 = (1 + x^2)^-a``."""
    return make_custom(
        v=lambda x: 0.5 * np.asarray(x, dtype=float) ** 2,
        v_prime=lambda x: np.asarray(x, dtype=float),
        v_second=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        weight_sq=lambda x: (1.0 + np.asarray(x, dtype=float) ** 2) ** -a,
        weight_sq_prime=lambda x: -2.0 * a * x * (1.0 + np.asarray(x, dtype=float) ** 2) ** (-a - 1.0),
        tail_decay=TailDecay("exp-power", 2.0),
    )


def cauchy_power_weight_model(beta: float, b: float) -> DiffusionModel:
    """Cauchy law with ``sigma^2 = (1 + x^2)^b``."""
    return make_custom(
        v=lambda x: beta * np.log1p(np.asarray(x, dtype=float) ** 2),
        v_prime=lambda x: 2.0 * beta * x / (1.0 + np.asarray(x, dtype=float) ** 2),
        v_second=lambda x: 2.0 * beta * (1.0 - x * x) / (1.0 + np.asarray(x, dtype=float) ** 2) ** 2,
        weight_sq=lambda x: (1.0 + np.asarray(x, dtype=float) ** 2) ** b,
        weight_sq_prime=lambda x: 2.0 * b * x * (1.0 + np.asarray(x, dtype=float) ** 2) ** (b - 1.0),
        tail_decay=TailDecay("polynomial", 2.0 * beta),
    )


def exp_quadratic_trial(eps: float) -> TestFunction:
    """``exp(eps x^2 / 2)``."""
    return TestFunction(
        f=lambda x: np.exp(0.5 * eps * x * x),
        f_prime=lambda x: eps * x * np.exp(0.5 * eps * x * x),
        label=f"exp(eps x^2/2), eps={eps:g}",
        epsilon=eps,
    )


def gaussian_power_weight_variance(eps: float) -> float:
    return 1.0 / math.sqrt(1.0 - 2.0 * eps) - 1.0 / (1.0 - eps)


def gaussian_power_weight_energy(a: float, eps: float) -> float:
    """Displayed energy ``2^(2-a) eps^2 Gamma(3/2-a) / (sqrt(2 pi) (1-2eps)^(3/2-a))``.

    This dominates the true Dirichlet energy, so the resulting quotient is still
    an upper bound for the gap.
    """
    c = 1.5 - a
    return math.exp((2.0 - a) * math.log(2.0) + 2.0 * math.log(eps) + log_gamma(c)
                    - 0.5 * math.log(2.0 * math.pi) - c * math.log1p(-2.0 * eps))


def gaussian_power_weight_energy_exact(a: float, eps: float) -> float:
    """True energy ``eps^2 Gamma(3/2) U(3/2, 5/2 - a, (1 - 2 eps)/2) / sqrt(2 pi)``.

    ``scipy.special.hyperu`` loses about six digits near ``b = 0``, so mpmath is used.
    """
    u = float(mpmath.hyperu(1.5, 2.5 - a, 0.5 - eps))
    return eps * eps * 0.5 * math.sqrt(math.pi) / math.sqrt(2.0 * math.pi) * u


def _check_gamma_pole(a):
    c = 1.5 - a
    if c <= 0 and c == math.floor(c):
        raise ValueError(f"a={a} puts Gamma(3/2 - a) on a pole")


def weight_optimality_gaussian(a: float, eps_grid: Sequence[float]) -> list[GapEstimate]:
    """Quotients of ``exp(eps x^2/2)`` for ``sigma^2 = (1+x^2)^-a``; they vanish as eps -> 1/2."""
    if not a > 1.0:
        raise ValueError(f"a must exceed 1, got {a}")
    _check_gamma_pole(a)
    eps = np.asarray(eps_grid, dtype=float)
    if np.any((eps <= 0) | (eps >= 0.5)):
        raise ValueError("epsilon must lie in (0, 1/2)")
    out = []
    for e in eps:
        var = gaussian_power_weight_variance(e)
        if a < 1.5:
            en = gaussian_power_weight_energy(a, e)
            how = "closed form"
        else:
            # Gamma(3/2 - a) is no longer positive; use the exact energy
            en = gaussian_power_weight_energy_exact(a, e)
            how = "hypergeometric"
        out.append(GapEstimate(float(en / var), EstimateKind.UPPER_BOUND,
                               f"rayleigh exp(eps x^2/2), eps={e:.12g} ({how})"))
    return out


def cauchy_power_weight_inverse_bound(beta: float, b: float, eps: float) -> float:
    """Lower bound on ``1/gap`` for ``sigma^2 = (1+x^2)^b`` from ``(1+x^2)^eps``."""
    a = beta - 2.0 * eps
    lg = log_gamma
    first = math.exp(lg(a - 0.5) - lg(a))
    second = math.exp(2.0 * lg(beta - eps - 0.5) + lg(beta)
                      - lg(beta - 0.5) - 2.0 * lg(beta - eps))
    factor = math.exp(lg(a + 2.0 - b) - lg(a + 0.5 - b)) / (2.0 * eps * eps)
    return (first - second) * factor


def weight_optimality_cauchy(beta: float, b: float,
                             eps_grid: Sequence[float]) -> list[GapEstimate]:
    """Upper bounds ``1 / (lower bound on 1/gap)``; they vanish as eps -> beta/2 - 1/4."""
    if not 0.0 < b < 1.0:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if not beta > 0.5:
        raise ValueError(f"beta must exceed 1/2, got {beta}")
    critical = beta / 2.0 - 0.25
    eps = np.asarray(eps_grid, dtype=float)
    if np.any((eps <= 0) | (eps >= critical)):
        raise ValueError(f"epsilon must lie in (0, {critical:g})")
    out = []
    for e in eps:
        inv = cauchy_power_weight_inverse_bound(beta, b, e)
        out.append(GapEstimate(float(1.0 / inv), EstimateKind.UPPER_BOUND,
                               f"rayleigh (1+x^2)^eps, eps={e:.12g}"))
    return out


# ---------------------------------------------------------------------------
# best available upper bound per model
# ---------------------------------------------------------------------------

def sine_trial() -> TestFunction:
    """``sin(pi x / 2)``: the first Neumann eigenfunction on [-1, 1]."""
    k = math.pi / 2.0
    return TestFunction(
        f=lambda x: np.sin(k * np.asarray(x, dtype=float)),
        f_prime=lambda x: k * np.cos(k * np.asarray(x, dtype=float)),
        label="sin(pi x/2)",
    )


def best_upper(model: DiffusionModel, spec: QuadratureSpec = DEFAULT_SPEC) -> GapEstimate | None:
    """Smallest Rayleigh upper bound among the trial functions suited to ``model``."""
    from .closed_form import rayleigh_linear_exp_power
    from .models import Family

    fam, p = model.family, model.param
    if fam is Family.EXP_POWER:
        return GapEstimate(rayleigh_linear_exp_power(p), EstimateKind.UPPER_BOUND,
                           "rayleigh f(x)=x (closed form)")
    if fam is Family.UNIFORM:
        return rayleigh_quotient(model, sine_trial(), spec)
    if fam is Family.GAUSSIAN_WEIGHTED:
        if p < 0.5:
            return rayleigh_quotient(model, gaussian_eigenfunction(p), spec)
        eps = np.geomspace(1e-8, 0.99, 60)
        return gaussian_upper_family(p, eps, spec, with_quadrature=False).best
    if fam is Family.CAUCHY:
        if p > 1.5:
            return GapEstimate(cauchy_upper_bound(p, 0.0), EstimateKind.UPPER_BOUND,
                               "rayleigh f(x)=x (closed form)")
        critical = (2.0 * p - 3.0) / 4.0
        eps = critical - np.geomspace(1e-9, 1.0, 60)
        return cauchy_upper_family(p, eps, spec, with_quadrature=False).best
    try:
        return rayleigh_quotient(model, linear(), spec)
    except (quadrature.QuadratureError, DegenerateTestFunction):
        return None
