"""Verification suites behind ``poincare-gap verify``.

Each suite returns a list of :class:`Case` records with the measured value, the
target and the tolerance used, so callers can print or assert on them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import closed_form as cf
from . import intertwining as it
from . import rayleigh as ry
from . import special_functions as sf
from .models import (
    DiffusionModel,
    Family,
    TailDecay,
    make_cauchy,
    make_cauchy_bl,
    make_custom,
    make_exp_power,
    make_gaussian_weighted,
    make_uniform,
)
from .spectral import spectral_gap_numeric

SLACK = 1e-6
POINT_BUDGET_SECONDS = 10.0


@dataclass(frozen=True)
class Case:
    name: str
    passed: bool
    measured: float
    expected: float
    delta: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        text = (f"{mark}  {self.name}: measured={self.measured:.10g} "
                f"target={self.expected:.10g} delta={self.delta:.3g} tol={self.tolerance:.3g}")
        return f"{text}  [{self.detail}]" if self.detail else text


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: tuple[Case, ...]
    seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def summary(self) -> str:
        ok = sum(c.passed for c in self.cases)
        return f"{self.name}: {ok}/{len(self.cases)} pass ({self.seconds:.1f} s)"


def _rel_case(name, measured, expected, tol, detail=""):
    delta = abs(measured - expected) / abs(expected)
    return Case(name, bool(delta <= tol), measured, expected, delta, tol, detail)


def _abs_case(name, measured, expected, tol, detail=""):
    delta = abs(measured - expected)
    return Case(name, bool(delta <= tol), measured, expected, delta, tol, detail)


# ---------------------------------------------------------------------------
# tolerances shared with the sweep flags
# ---------------------------------------------------------------------------

def acceptance_tolerance(model: DiffusionModel) -> float:
    """Relative tolerance for numeric-vs-closed-form agreement."""
    fam, p = model.family, model.param
    if fam is Family.GAUSSIAN_WEIGHTED:
        return 1e-3 if p < 0.5 else 2e-2
    if fam is Family.CAUCHY:
        return 1e-3 if p > 1.5 else 2e-2
    if fam is Family.EXP_POWER and p == 1.0:
        return 2e-2
    if fam is Family.UNIFORM:
        return 1e-3 / cf.exp_power_exact(math.inf)
    return 1e-3


def _timed_gap(model, quality):
    start = time.perf_counter()
    est = spectral_gap_numeric(model, quality)
    return est, time.perf_counter() - start


def _closed_form_cases(prefix, models, quality):
    out = []
    for model in models:
        exact = cf.theorem_for(model).value
        est, secs = _timed_gap(model, quality)
        case = _rel_case(f"{prefix} {model.label}", est.value, exact, acceptance_tolerance(model),
                         f"±{est.error:.2g}, {secs:.2f} s")
        if secs > POINT_BUDGET_SECONDS:
            case = Case(case.name, False, case.measured, case.expected, case.delta,
                        case.tolerance, case.detail + " over time budget")
        out.append(case)
    return out


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

GAUSS_WEIGHTED_B = (0.1, 0.25, 0.49, 0.5, 1.0, 2.0)
CAUCHY_BETA = (0.75, 1.0, 1.5, 2.0, 3.0)
EXP_POWER_ALPHA = (1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0)
BL_BETA = (2.0, 5.0, 10.0)


def suite_gauss_weighted(quality="standard"):
    return _closed_form_cases("gap", [make_gaussian_weighted(b) for b in GAUSS_WEIGHTED_B], quality)


def suite_cauchy(quality="standard"):
    return _closed_form_cases("gap", [make_cauchy(b) for b in CAUCHY_BETA], quality)


def suite_exp_power(quality="standard"):
    out = []
    for alpha in EXP_POWER_ALPHA:
        model = make_exp_power(alpha)
        lo, hi = cf.exp_power_gap_bounds(alpha)
        est, secs = _timed_gap(model, quality)
        v = est.value
        # distance outside [lo, hi]; zero when inside
        outside = max(lo - v, v - hi, 0.0)
        out.append(Case(f"sandwich {model.label}", outside <= SLACK, v, 0.5 * (lo + hi), outside,
                        SLACK, f"bounds [{lo:.6g}, {hi:.6g}], {secs:.2f} s"))
    for alpha, exact in ((1.0, 0.25), (2.0, 1.0)):
        model = make_exp_power(alpha)
        out.append(_rel_case(f"exact {model.label}", spectral_gap_numeric(model, quality).value,
                             exact, acceptance_tolerance(model)))
    out.append(_abs_case("uniform limit", spectral_gap_numeric(make_uniform(), quality).value,
                         math.pi ** 2 / 4.0, 1e-3))
    return out


def suite_bl_limit(quality="standard"):
    out = []
    values = []
    for beta in BL_BETA:
        model = make_cauchy_bl(beta)
        v = spectral_gap_numeric(model, quality).value
        values.append(v)
        out.append(_rel_case(f"gap {model.label}", v, cf.cauchy_bl_gap(beta), 1e-3))
    out.append(Case("beta=10 exceeds 0.94", values[-1] > 0.94, values[-1], 0.94,
                    max(0.94 - values[-1], 0.0), 0.0))
    rising = bool(np.all(np.diff(values) > 0.0))
    out.append(Case("increasing toward 1", rising, values[-1], 1.0, 1.0 - values[-1], 0.0,
                    ", ".join(f"{v:.6f}" for v in values)))
    return out


INTERTWINING_TOL = 1e-6
EPSILON_TOL = 1e-4


def suite_intertwining(quality="standard"):
    out = []
    for b in (0.5, 1.0, 2.0):
        eps, est = it.optimize_epsilon(make_gaussian_weighted(b))
        out.append(_rel_case(f"inf V_f gauss-weighted:b={b:g}", est.value, 1.0 / (4.0 * b),
                             INTERTWINING_TOL, f"eps={eps:.8f}"))
    for beta in (0.75, 1.0, 1.5):
        eps, est = it.optimize_epsilon(make_cauchy(beta))
        out.append(_rel_case(f"inf V_f cauchy:beta={beta:g}", est.value, (beta - 0.5) ** 2,
                             INTERTWINING_TOL))
        out.append(_abs_case(f"best eps' cauchy:beta={beta:g}", eps, (2.0 * beta - 3.0) / 4.0,
                             EPSILON_TOL))
    for alpha in (1.0, 1.5, 2.0):
        eps, est = it.optimize_epsilon(make_exp_power(alpha))
        out.append(_rel_case(f"inf V_f exp-power:alpha={alpha:g}", est.value, alpha ** 2 / 4.0,
                             INTERTWINING_TOL))
        out.append(_abs_case(f"best eps exp-power:alpha={alpha:g}", eps, (2.0 - alpha) / 2.0,
                             EPSILON_TOL))
    return out


GAUSS_FAMILY_EPS = (1e-4, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9)
QUADRATURE_MATCH = 1e-6


def cauchy_family_grid(beta):
    critical = (2.0 * beta - 3.0) / 4.0
    return critical - np.geomspace(1e-7, 1.0, 15)


def suite_rayleigh_limits(quality="standard"):
    out = []
    for b in (0.5, 1.0):
        scan = ry.gaussian_upper_family(b, GAUSS_FAMILY_EPS)
        out.append(_abs_case(f"displayed bound at eps=1e-4, b={b:g}", float(scan.analytic[0]),
                             1.0 / (4.0 * b), 1e-3))
        for e, q, exact in zip(scan.epsilons, scan.quadrature, scan.exact):
            if np.isfinite(q):
                out.append(_rel_case(f"quadrature vs exact quotient b={b:g} eps={e:g}", q, exact,
                                     QUADRATURE_MATCH))
    for beta in (1.0, 1.5):
        scan = ry.cauchy_upper_family(beta, cauchy_family_grid(beta))
        out.append(_abs_case(f"cauchy family limit beta={beta:g}", scan.limit_extrapolated,
                             (beta - 0.5) ** 2, 1e-3))
        for e, q, a in zip(scan.epsilons, scan.quadrature, scan.analytic):
            if np.isfinite(q):
                out.append(_rel_case(f"quadrature vs analytic beta={beta:g} eps={e:.6g}", q, a,
                                     QUADRATURE_MATCH))
    return out


GAMMA_CASES = 10_000
GAMMA_SLACK = -1e-12


def suite_gamma_ineqs(quality="standard", seed=20240611):
    rng = np.random.default_rng(seed)
    out = []

    b = 1.0 + 49.0 * rng.random(GAMMA_CASES)
    a = np.maximum(b - rng.random(GAMMA_CASES), 1e-6)
    slack = np.array([sf.kershaw_bound(x, y) - sf.kershaw_lhs(x, y) for x, y in zip(a, b)])
    worst = float(slack.min())
    out.append(Case(f"kershaw {GAMMA_CASES} random pairs", worst >= GAMMA_SLACK, worst, 0.0,
                    max(-worst, 0.0), -GAMMA_SLACK, f"{int((slack < GAMMA_SLACK).sum())} violations"))

    a = np.exp(rng.uniform(math.log(1e-3), math.log(50.0), GAMMA_CASES))
    bb = rng.random(GAMMA_CASES)
    slack = np.array([sf.logconvex_bound(x, y) - sf.logconvex_lhs(x, y) for x, y in zip(a, bb)])
    worst = float(slack.min())
    out.append(Case(f"log-convexity {GAMMA_CASES} random pairs", worst >= GAMMA_SLACK, worst, 0.0,
                    max(-worst, 0.0), -GAMMA_SLACK, f"{int((slack < GAMMA_SLACK).sum())} violations"))

    z = np.linspace(0.1, 199.0, 2000)
    rec = np.max(np.abs(sf.log_gamma(z + 1.0) - sf.log_gamma(z) - np.log(z)))
    out.append(_abs_case("log_gamma recurrence", float(rec), 0.0, 1e-10))
    z = np.linspace(0.01, 0.99, 99)
    refl = np.max(np.abs(sf.log_gamma(z) + sf.log_gamma(1.0 - z)
                         - np.log(np.pi / np.sin(np.pi * z))))
    out.append(_abs_case("log_gamma reflection", float(refl), 0.0, 1e-10))
    return out


WEIGHT_THRESHOLD = 1e-2


def _vanishing_case(name, ests, eps):
    vals = np.array([e.value for e in ests])
    decreasing = bool(np.all(np.diff(vals) < 0.0))
    last = float(vals[-1])
    return Case(name, decreasing and last < WEIGHT_THRESHOLD, last, 0.0, last, WEIGHT_THRESHOLD,
                f"eps up to {eps[-1]:.15g}, {'decreasing' if decreasing else 'not decreasing'}")


def suite_weight_optimality(quality="standard"):
    gaps = 10.0 ** -np.arange(2, 13)
    eps = 0.5 - gaps
    out = [_vanishing_case("gaussian a=1.2", ry.weight_optimality_gaussian(1.2, eps), eps)]
    eps = 0.75 - gaps
    out.append(_vanishing_case("cauchy beta=2 b=0.5", ry.weight_optimality_cauchy(2.0, 0.5, eps), eps))
    return out


def brascamp_lieb_model() -> DiffusionModel:
    """Strictly convex ``V = x^2/2 + x^4/12`` with ``sigma^2 = 1/V''``."""
    return make_custom(
        v=lambda x: 0.5 * x * x + x ** 4 / 12.0,
        v_prime=lambda x: x + x ** 3 / 3.0,
        v_second=lambda x: 1.0 + x * x,
        weight_sq=lambda x: 1.0 / (1.0 + x * x),
        weight_sq_prime=lambda x: -2.0 * x / (1.0 + x * x) ** 2,
        tail_decay=TailDecay("exp-power", 4.0, scale=3.0 ** 0.25),
    )


def suite_brascamp_lieb(quality="standard"):
    model = brascamp_lieb_model()
    res = it.brascamp_lieb_residual(model, np.linspace(-10.0, 10.0, 2001))
    return [
        _abs_case("residual L V' + V'", res, 0.0, 1e-6),
        _abs_case("numeric gap", spectral_gap_numeric(model, quality).value, 1.0, 1e-3),
    ]


SUITES: dict[str, Callable[..., list[Case]]] = {
    "thm-exp-power": suite_exp_power,
    "thm-gauss-weighted": suite_gauss_weighted,
    "thm-cauchy": suite_cauchy,
    "bl-limit": suite_bl_limit,
    "gamma-ineqs": suite_gamma_ineqs,
    "weight-optimality": suite_weight_optimality,
    "intertwining": suite_intertwining,
    "rayleigh-limits": suite_rayleigh_limits,
    "brascamp-lieb": suite_brascamp_lieb,
}


def run_suite(name: str, quality: str = "standard") -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    start = time.perf_counter()
    cases = SUITES[name](quality)
    return SuiteResult(name, tuple(cases), time.perf_counter() - start)
