"""Lower bounds on the gap from ``lambda_1 >= inf V_f`` for increasing ``f``.

For ``f`` with ``f' > 0`` set ``V_f = (-L f)' / f'``.  The main family is
``f_eps' = exp(eps V) / sigma^2``, for which ``V_f = (1-eps) sigma^2 (V'' + eps V'^2)``.

The Cauchy family is parametrised by ``eps'`` with ``eps = (eps' + 1) / beta``;
in that parameter ``V_f = 2(beta - eps' - 1)(1 + (2 eps' + 1) x^2) / (1 + x^2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from . import quadrature
from .models import DiffusionModel, EstimateKind, Family, GapEstimate, generator


class CandidateKind(enum.Enum):
    EXP_OF_POTENTIAL = "exp-of-potential"
    EXPLICIT_F_PRIME = "explicit-f-prime"
    POISSON_SOLUTION = "poisson-solution"


@dataclass(frozen=True)
class CandidateFamily:
    """Increasing test functions indexed by ``epsilon``.

    ``EXPLICIT_F_PRIME`` needs ``f_prime``, ``f_second`` and ``f_third`` as
    callables ``(eps, x) -> array``.
    """

    kind: CandidateKind
    epsilon_range: tuple[float, float]
    closed: tuple[bool, bool] = (False, False)
    f_prime: Callable | None = None
    f_second: Callable | None = None
    f_third: Callable | None = None

    def __post_init__(self):
        lo, hi = self.epsilon_range
        if not lo <= hi:
            raise ValueError(f"empty epsilon range {self.epsilon_range}")
        if self.kind is CandidateKind.EXPLICIT_F_PRIME and None in (
                self.f_prime, self.f_second, self.f_third):
            raise ValueError("an explicit family needs f', f'' and f'''")


def default_family(model: DiffusionModel) -> CandidateFamily:
    """``exp(eps V)/sigma^2`` over the admissible range for ``model``."""
    fam, p = model.family, model.param
    kind = CandidateKind.EXP_OF_POTENTIAL
    if fam is Family.GAUSSIAN_WEIGHTED:
        return CandidateFamily(kind, (0.0, 1.0))
    if fam is Family.CAUCHY:
        return CandidateFamily(kind, (-0.5, p - 1.0))
    if fam is Family.CAUCHY_BL:
        return CandidateFamily(kind, (1.0 / (2.0 * p), 1.0))
    return CandidateFamily(kind, (0.0, 1.0), closed=(True, False))


def generic_epsilon(model: DiffusionModel, epsilon: float) -> float:
    """Exponent multiplying ``V`` in ``f'``; differs from ``epsilon`` only for Cauchy."""
    if model.family is Family.CAUCHY:
        return (epsilon + 1.0) / model.param
    return epsilon


def singular_at_origin(model: DiffusionModel) -> bool:
    """``V''`` blows up (1 < alpha < 2) or carries a point mass (alpha = 1) at 0."""
    return model.family is Family.EXP_POWER and 1.0 <= model.param < 2.0


def v_f_eps(model: DiffusionModel, epsilon: float, x):
    """``(1-eps) sigma^2 (V'' + eps V'^2)``; ``epsilon`` is ``eps'`` for Cauchy models."""
    x = np.asarray(x, dtype=float)
    if singular_at_origin(model) and np.any(x == 0.0):
        raise ValueError("V'' is singular at 0 for 1 <= alpha < 2")
    e = generic_epsilon(model, epsilon)
    with np.errstate(over="ignore", invalid="ignore"):
        return (1.0 - e) * model.weight_sq(x) * (
            model.potential_v_second(x) + e * model.potential_v_prime(x) ** 2)


def _weight_sq_second(model, x, h=1e-5):
    step = h * np.maximum(1.0, np.abs(x))
    return (model.weight_sq_prime(x + step) - model.weight_sq_prime(x - step)) / (2.0 * step)


def v_f_explicit(model: DiffusionModel, family: CandidateFamily, epsilon: float, x):
    """``(-L f)'/f'`` for a user-supplied ``f'``, writing ``h = sigma^2 f'``."""
    x = np.asarray(x, dtype=float)
    g = family.f_prime(epsilon, x)
    g1 = family.f_second(epsilon, x)
    g2 = family.f_third(epsilon, x)
    s0 = model.weight_sq(x)
    s1 = model.weight_sq_prime(x)
    s2 = _weight_sq_second(model, x)
    h = s0 * g
    h1 = s1 * g + s0 * g1
    h2 = s2 * g + 2.0 * s1 * g1 + s0 * g2
    return (-h2 + model.potential_v_second(x) * h + model.potential_v_prime(x) * h1) / g


# ---------------------------------------------------------------------------
# infimum over the line
# ---------------------------------------------------------------------------

def analytic_infimum(model: DiffusionModel, epsilon: float) -> float | None:
    """Closed-form ``inf V_f`` for the built-in families, else None."""
    fam, p = model.family, model.param
    if fam is Family.EXP_POWER:
        e = epsilon
        if p == 1.0:
            return (1.0 - e) * e
        if p == 2.0:
            return 1.0 - e
        if p > 2.0 or e == 0.0:
            return 0.0
        u = (2.0 - p) / (2.0 * e)
        return (1.0 - e) * ((p - 1.0) * u ** (1.0 - 2.0 / p) + e * u ** (2.0 - 2.0 / p))
    if fam is Family.GAUSSIAN_WEIGHTED:
        e = epsilon
        return e * (1.0 - e) / p if e <= p else 1.0 - e
    if fam is Family.CAUCHY:
        return 2.0 * (p - epsilon - 1.0) * min(1.0, 2.0 * epsilon + 1.0)
    if fam is Family.CAUCHY_BL:
        e = epsilon
        return 2.0 * p * (1.0 - e) * min(1.0, 2.0 * e * p - 1.0) / (2.0 * p - 1.0)
    if fam is Family.UNIFORM:
        return 0.0
    return None


GRID_DECADES = (-8.0, 8.0)
GRID_POINTS = 801


def default_grid(model: DiffusionModel) -> np.ndarray:
    """Symmetric log-spaced points, with 0 added unless ``V''`` is singular there."""
    if model.bounded:
        lo, hi = model.support
        half = min(-lo, hi) * (1.0 - np.logspace(-12, 0, GRID_POINTS, endpoint=False))
    else:
        half = np.logspace(*GRID_DECADES, GRID_POINTS)
    pts = [-half[::-1], half]
    if not singular_at_origin(model):
        pts.insert(1, [0.0])
    return np.concatenate(pts)


@dataclass(frozen=True)
class InfimumResult:
    """``inf V_f`` for one ``epsilon``; ``value`` may be negative."""

    epsilon: float
    value: float
    argmin: float
    grid_value: float
    analytic: float | None
    flags: tuple[str, ...] = ()

    @property
    def certified(self) -> bool:
        return self.analytic is not None

    def estimate(self, method: str = "intertwining") -> GapEstimate:
        if self.value <= 0.0:
            return GapEstimate(0.0, EstimateKind.NO_BOUND, f"{method}, eps={self.epsilon:.12g}",
                               flags=self.flags)
        if self.certified:
            return GapEstimate(self.value, EstimateKind.LOWER_BOUND,
                               f"{method}, eps={self.epsilon:.12g}",
                               error=abs(self.grid_value - self.analytic), flags=self.flags)
        return GapEstimate(self.value, EstimateKind.NUMERICAL,
                           f"{method} grid infimum, eps={self.epsilon:.12g}", flags=self.flags)


ANALYTIC_MATCH_TOL = 1e-8


def _values(fn, x):
    vals = np.asarray(fn(x), dtype=float)
    if np.any(np.isnan(vals)):
        raise ValueError(f"V_f is not finite at x={x[np.isnan(vals)][0]:g}")
    # +inf only ever appears far out where V_f grows; it cannot be the infimum
    return np.where(np.isposinf(vals), np.inf, vals)


def inf_v_f(model: DiffusionModel, epsilon: float, grid=None,
            family: CandidateFamily | None = None) -> InfimumResult:
    """Grid minimum of ``V_f`` refined by golden section around the argmin."""
    x = default_grid(model) if grid is None else np.sort(np.asarray(grid, dtype=float))
    if family is not None and family.kind is CandidateKind.EXPLICIT_F_PRIME:
        def fn(t):
            return v_f_explicit(model, family, epsilon, t)
    else:
        def fn(t):
            return v_f_eps(model, epsilon, t)

    vals = _values(fn, x)
    if np.all(np.isinf(vals)):
        raise ValueError("V_f is infinite on the whole grid")
    i = int(np.argmin(vals))
    best_x, best = float(x[i]), float(vals[i])
    if 0 < i < len(x) - 1:
        # refining across 0 would hit the singular point
        lo, hi = x[i - 1], x[i + 1]
        strict = vals[i] < vals[i - 1] and vals[i] < vals[i + 1]
        if strict and not (singular_at_origin(model) and lo < 0.0 < hi):
            res = optimize.minimize_scalar(
                lambda t: float(fn(np.array([t]))[0]), bracket=(lo, x[i], hi),
                method="golden", options={"xtol": 1e-10, "maxiter": 200})
            if res.fun < best and lo <= res.x <= hi:
                best_x, best = float(res.x), float(res.fun)

    exact = analytic_infimum(model, epsilon)
    flags = []
    value = best
    if exact is not None:
        if abs(best - exact) > ANALYTIC_MATCH_TOL * max(1.0, abs(exact)):
            flags.append("grid-analytic mismatch")
        value = exact
    return InfimumResult(epsilon, value, best_x, best, exact, tuple(flags))


# ---------------------------------------------------------------------------
# optimising over epsilon
# ---------------------------------------------------------------------------

SCAN_POINTS = 64
EPS_XTOL = 1e-10


def _scan_points(family: CandidateFamily) -> np.ndarray:
    lo, hi = family.epsilon_range
    pts = np.linspace(lo, hi, SCAN_POINTS + 2)
    keep = np.ones(pts.size, dtype=bool)
    keep[0] = family.closed[0]
    keep[-1] = family.closed[1]
    return pts[keep]


def _local_maxima(vals):
    n = len(vals)
    out = [i for i in range(n)
           if (i == 0 or vals[i] >= vals[i - 1]) and (i == n - 1 or vals[i] >= vals[i + 1])]
    # plateaus produce runs of equal maxima; keep the first of each run
    return [i for k, i in enumerate(out) if k == 0 or i != out[k - 1] + 1] or [int(np.argmax(vals))]


def optimize_epsilon(model: DiffusionModel, family: CandidateFamily | None = None,
                     epsilon_range: tuple[float, float] | None = None,
                     grid=None) -> tuple[float, GapEstimate]:
    """Maximise ``inf V_f`` over ``epsilon``: coarse scan then golden-section refinement."""
    family = family or default_family(model)
    if epsilon_range is not None:
        family = CandidateFamily(family.kind, tuple(epsilon_range), family.closed,
                                 family.f_prime, family.f_second, family.f_third)
    if family.kind is CandidateKind.POISSON_SOLUTION:
        return math.nan, poisson_lower_bound(model, grid)
    x = default_grid(model) if grid is None else grid

    cache: dict[float, InfimumResult] = {}

    def infimum(e):
        e = float(e)
        if e not in cache:
            cache[e] = inf_v_f(model, e, x, family)
        return cache[e]

    pts = _scan_points(family)
    if pts.size == 0:
        raise ValueError("no admissible epsilon in the range")
    vals = [infimum(e).value for e in pts]
    lo_lim, hi_lim = family.epsilon_range
    for i in _local_maxima(vals):
        a = pts[i - 1] if i > 0 else (pts[i] if family.closed[0] else lo_lim)
        b = pts[i + 1] if i < len(pts) - 1 else (pts[i] if family.closed[1] else hi_lim)
        if b - a <= EPS_XTOL:
            continue
        res = optimize.minimize_scalar(lambda e: -infimum(e).value, bounds=(a, b),
                                       method="bounded", options={"xatol": EPS_XTOL})
        infimum(res.x)
    best = max(cache.values(), key=lambda r: r.value)
    return best.epsilon, best.estimate("intertwining exp(eps V)/sigma^2")


# ---------------------------------------------------------------------------
# Poisson-equation candidate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonProfile:
    x: np.ndarray
    f_prime: np.ndarray

    @property
    def argmax(self) -> float:
        """Smallest ``|x|`` attaining the maximum up to rounding."""
        top = np.max(self.f_prime)
        near = self.x[self.f_prime >= top * (1.0 - 1e-10)]
        return float(near[np.argmin(np.abs(near))])

    @property
    def sup(self) -> float:
        return float(np.max(self.f_prime))


_POISSON_SPEC = quadrature.QuadratureSpec(rel_tol=1e-10)
_TAIL_DROP = 800.0  # exp(-800) is below the smallest double


def _tail_cutoff(model, x0, v0, sign):
    """Point beyond ``x0`` (in direction ``sign``) where ``V`` has grown by ``_TAIL_DROP``."""
    def excess(y):
        return float(model.potential_v(y)) - v0 - _TAIL_DROP

    step = 1.0
    while excess(x0 + sign * step) < 0.0:
        step *= 2.0
        if step > 1e12:
            raise ValueError("potential does not grow; the Poisson solution is not integrable")
    root = optimize.brentq(excess, x0 + sign * step / 2.0 if step > 1.0 else x0,
                           x0 + sign * step, xtol=1e-12)
    return root


def poisson_f_prime(model: DiffusionModel, x, centre: float = 0.0) -> np.ndarray:
    """``f'`` solving ``-L f = x - centre``: ``exp(V(x))/sigma^2(x) ∫_x^inf (y - centre) exp(-V(y)) dy``.

    ``centre`` must be the mean of ``mu``.  Left of the centre the equivalent
    lower-tail integral is used, which avoids cancellation, and the exponent
    difference ``V(x) - V(y)`` is integrated directly so that nothing overflows.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vx = model.potential_v(xs)
    out = np.empty_like(xs)
    for k, (xk, v0) in enumerate(zip(xs, vx)):
        sign = 1.0 if xk >= centre else -1.0

        def integrand(y, v0=v0, sign=sign):
            return sign * (y - centre) * np.exp(v0 - model.potential_v(y))

        end = _tail_cutoff(model, xk, v0, sign)
        lo, hi = (xk, end) if sign > 0 else (end, xk)
        val = quadrature.integrate_interval(integrand, lo, hi, _POISSON_SPEC)
        out[k] = val / float(model.weight_sq(xk))
    return out


def poisson_lower_bound(model: DiffusionModel, grid=None) -> GapEstimate:
    """``1 / sup f'`` for the Poisson solution; valid for exp-power with ``alpha >= 2``."""
    if model.family is not Family.EXP_POWER or not model.param >= 2.0:
        raise ValueError("the Poisson-equation bound needs an exp-power model with alpha >= 2")
    if grid is None:
        # |x|^alpha/alpha <= 50 holds essentially all of the mass
        reach = (50.0 * model.param) ** (1.0 / model.param)
        grid = np.linspace(-reach, reach, 161)
    x = np.asarray(grid, dtype=float)
    profile = PoissonProfile(x, poisson_f_prime(model, x))
    flags = () if profile.argmax == 0.0 else ("sup not at origin",)
    return GapEstimate(1.0 / profile.sup, EstimateKind.LOWER_BOUND,
                       f"intertwining poisson solution, sup f' at x={profile.argmax:g}",
                       flags=flags)


# ---------------------------------------------------------------------------
# weighted inequalities with unit diffusion coefficient
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BrascampLiebWeight:
    """``x -> 4 gamma - 4 gamma^2 x^2 + V'^2 + 2 V''`` and where it stays positive.

    When positive on the whole line,
    ``Var(g)/4 <= ∫ g'^2 / weight dmu``.
    """

    gamma: float
    weight: Callable
    grid: np.ndarray
    positive: bool
    negative_points: np.ndarray = field(repr=False)
    constant: float = 0.25

    def statement(self) -> str:
        if not self.positive:
            return f"weight not positive for gamma={self.gamma:g}; no inequality"
        return (f"Var(g)/4 <= int g'^2 / (4*{self.gamma:g} - 4*{self.gamma:g}^2 x^2 "
                f"+ V'^2 + 2V'') dmu")


def generalized_brascamp_lieb_weight(model: DiffusionModel, gamma: float,
                                     grid=None) -> BrascampLiebWeight:
    x = np.linspace(-50.0, 50.0, 2001) if grid is None else np.asarray(grid, dtype=float)
    if not np.allclose(model.weight_sq(x), 1.0, rtol=0.0, atol=1e-14):
        raise ValueError("the weighted inequality is stated for sigma^2 = 1")

    def weight(t):
        t = np.asarray(t, dtype=float)
        return (4.0 * gamma - 4.0 * gamma * gamma * t * t
                + model.potential_v_prime(t) ** 2 + 2.0 * model.potential_v_second(t))

    w = weight(x)
    bad = x[w <= 0.0]
    return BrascampLiebWeight(gamma, weight, x, bad.size == 0, bad)


def _third_derivative(model, x, h=1e-4):
    """Five-point centred difference of ``V''``."""
    step = h * np.maximum(1.0, np.abs(x))
    v2 = model.potential_v_second
    return (-v2(x + 2 * step) + 8 * v2(x + step) - 8 * v2(x - step) + v2(x - 2 * step)) / (12 * step)


def brascamp_lieb_residual(model: DiffusionModel, x) -> float:
    """Relative size of ``L V' + V'`` on ``x``; vanishes when ``sigma^2 = 1/V''``."""
    x = np.asarray(x, dtype=float)
    v1 = model.potential_v_prime(x)
    lv1 = generator(model, model.potential_v_second, lambda t: _third_derivative(model, t), x)
    return float(np.max(np.abs(lv1 + v1)) / np.max(np.abs(v1)))


def best_lower(model: DiffusionModel) -> tuple[float, GapEstimate]:
    """Largest intertwining bound: the optimised ``exp(eps V)`` family, plus the
    Poisson candidate where it applies.  Returns ``(epsilon, estimate)``; epsilon
    is NaN when the Poisson candidate wins."""
    eps, est = optimize_epsilon(model)
    if model.family is Family.EXP_POWER and model.param >= 2.0:
        poisson = poisson_lower_bound(model)
        if poisson.value > est.value:
            return math.nan, poisson
    return eps, est
