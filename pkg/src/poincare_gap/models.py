"""Measure/weight families and the one-dimensional diffusion operator.

A model is a potential ``V`` (the measure is ``mu(dx) ∝ exp(-V(x)) dx``) together
with a positive weight ``sigma^2``.  The generator is

    L f = sigma^2 f'' + ((sigma^2)' - sigma^2 V') f'

and is symmetric in ``L^2(mu)`` with Dirichlet form ``∫ sigma^2 f'^2 dmu``.
All callables are vectorised over numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ScalarFn = Callable[[np.ndarray], np.ndarray]


class Family(enum.Enum):
    EXP_POWER = "exp-power"
    GAUSSIAN_WEIGHTED = "gauss-weighted"
    CAUCHY = "cauchy"
    CAUCHY_BL = "cauchy-bl"
    UNIFORM = "uniform"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TailDecay:
    """How fast the density decays; drives the truncation radius.

    ``kind`` is ``"exp-power"`` (density ~ exp(-|x|^p / p)), ``"polynomial"``
    (density ~ |x/scale|^-p) or ``"bounded"`` (compact support).
    """

    kind: str
    exponent: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp-power", "polynomial", "bounded"):
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "polynomial" and self.exponent <= 1.0:
            raise ValueError("polynomial tail needs exponent > 1 to be integrable")
        if self.kind == "exp-power" and self.exponent <= 0.0:
            raise ValueError("exp-power tail needs a positive exponent")


@dataclass(frozen=True)
class DiffusionModel:
    potential_v: ScalarFn
    potential_v_prime: ScalarFn
    potential_v_second: ScalarFn
    weight_sq: ScalarFn
    weight_sq_prime: ScalarFn
    family: Family
    tail_decay: TailDecay
    param: float | None = None
    support: tuple[float, float] = (-math.inf, math.inf)
    # Optional closed forms of s(x) = ∫_0^x du / sigma(u) and its inverse.
    metric: ScalarFn | None = field(default=None, compare=False)
    metric_inverse: ScalarFn | None = field(default=None, compare=False)

    @property
    def label(self) -> str:
        if self.family is Family.EXP_POWER:
            return f"exp-power:alpha={self.param:g}"
        if self.family is Family.GAUSSIAN_WEIGHTED:
            return f"gauss-weighted:b={self.param:g}"
        if self.family in (Family.CAUCHY, Family.CAUCHY_BL):
            return f"{self.family.value}:beta={self.param:g}"
        return self.family.value

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.support[0]) and math.isfinite(self.support[1])

    def log_density(self, x):
        """Unnormalised log density ``-V(x)``."""
        return -self.potential_v(np.asarray(x, dtype=float))


class EstimateKind(enum.Enum):
    EXACT = "exact"
    LOWER_BOUND = "lower"
    UPPER_BOUND = "upper"
    NUMERICAL = "numerical"
    NO_BOUND = "no positive bound"


@dataclass(frozen=True)
class GapEstimate:
    """A value for the spectral gap together with where it came from."""

    value: float
    kind: EstimateKind
    method: str
    error: float | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.value >= 0.0:
            raise ValueError(f"gap estimate must be nonnegative, got {self.value}")
        if self.kind is EstimateKind.EXACT and self.error is not None:
            raise ValueError("exact values carry no error")
        if self.error is not None and not self.error >= 0.0:
            raise ValueError("error must be nonnegative")


def _arr(x):
    return np.asarray(x, dtype=float)


def _const(value):
    return lambda x: np.full_like(_arr(x), value)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def make_exp_power(alpha: float) -> DiffusionModel:
    """Exponential power law ``V(x) = |x|^alpha / alpha`` with ``sigma = 1``."""
    alpha = float(alpha)
    if not alpha >= 1.0 or math.isinf(alpha):
        raise ValueError(f"exp-power requires 1 <= alpha < inf, got {alpha}")

    def v(x):
        return np.abs(_arr(x)) ** alpha / alpha

    def v1(x):
        x = _arr(x)
        return np.sign(x) * np.abs(x) ** (alpha - 1.0)

    def v2(x):
        x = _arr(x)
        if alpha == 1.0:
            return np.zeros_like(x)
        if alpha == 2.0:
            return np.ones_like(x)
        with np.errstate(divide="ignore"):
            return (alpha - 1.0) * np.abs(x) ** (alpha - 2.0)

    return DiffusionModel(
        potential_v=v,
        potential_v_prime=v1,
        potential_v_second=v2,
        weight_sq=_const(1.0),
        weight_sq_prime=_const(0.0),
        family=Family.EXP_POWER,
        param=alpha,
        tail_decay=TailDecay("exp-power", alpha),
        metric=lambda x: _arr(x),
        metric_inverse=lambda s: _arr(s),
    )


def make_uniform() -> DiffusionModel:
    """Uniform law on [-1, 1]: the ``alpha -> inf`` end of the exp-power family."""
    return DiffusionModel(
        potential_v=lambda x: np.zeros_like(_arr(x)),
        potential_v_prime=lambda x: np.zeros_like(_arr(x)),
        potential_v_second=lambda x: np.zeros_like(_arr(x)),
        weight_sq=_const(1.0),
        weight_sq_prime=_const(0.0),
        family=Family.UNIFORM,
        param=math.inf,
        tail_decay=TailDecay("bounded"),
        support=(-1.0, 1.0),
        metric=lambda x: _arr(x),
        metric_inverse=lambda s: _arr(s),
    )


def make_gaussian_weighted(b: float) -> DiffusionModel:
    """Standard Gaussian with weight ``sigma^2(x) = 1 / (1 + b x^2)``."""
    b = float(b)
    if not b > 0.0:
        raise ValueError(f"gauss-weighted requires b > 0, got {b}")
    rb = math.sqrt(b)

    def metric(x):
        x = _arr(x)
        return 0.5 * (x * np.sqrt(1.0 + b * x * x) + np.arcsinh(rb * x) / rb)

    def metric_inverse(s):
        s = _arr(s)
        # Newton from an initial guess exact at both ends; s(x) is convex on x>0.
        a = np.abs(s)
        x = np.where(a < 1.0, a, np.sqrt(2.0 * a / rb))
        x = np.minimum(x, a)
        for _ in range(60):
            step = (metric(x) - a) / np.sqrt(1.0 + b * x * x)
            x = x - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, x)):
                break
        return np.sign(s) * x

    return DiffusionModel(
        potential_v=lambda x: 0.5 * _arr(x) ** 2,
        potential_v_prime=lambda x: _arr(x),
        potential_v_second=lambda x: np.ones_like(_arr(x)),
        weight_sq=lambda x: 1.0 / (1.0 + b * _arr(x) ** 2),
        weight_sq_prime=lambda x: -2.0 * b * _arr(x) / (1.0 + b * _arr(x) ** 2) ** 2,
        family=Family.GAUSSIAN_WEIGHTED,
        param=b,
        tail_decay=TailDecay("exp-power", 2.0),
        metric=metric,
        metric_inverse=metric_inverse,
    )


def _log1p_sq(x):
    # log(1 + x^2) without overflowing x^2 for |x| up to ~1e300
    return 2.0 * np.log(np.hypot(1.0, _arr(x)))


def make_cauchy(beta: float) -> DiffusionModel:
    """Generalised Cauchy ``V(x) = beta log(1 + x^2)`` with ``sigma^2 = 1 + x^2``."""
    beta = float(beta)
    if not beta > 0.5:
        raise ValueError(f"cauchy requires beta > 1/2 (normalisable), got {beta}")
    return DiffusionModel(
        potential_v=lambda x: beta * _log1p_sq(x),
        potential_v_prime=lambda x: 2.0 * beta * _arr(x) / (1.0 + _arr(x) ** 2),
        potential_v_second=lambda x: 2.0 * beta * (1.0 - _arr(x) ** 2) / (1.0 + _arr(x) ** 2) ** 2,
        weight_sq=lambda x: 1.0 + _arr(x) ** 2,
        weight_sq_prime=lambda x: 2.0 * _arr(x),
        family=Family.CAUCHY,
        param=beta,
        tail_decay=TailDecay("polynomial", 2.0 * beta),
        metric=lambda x: np.arcsinh(_arr(x)),
        metric_inverse=lambda s: np.sinh(_arr(s)),
    )


def make_cauchy_bl(beta: float) -> DiffusionModel:
    """Rescaled Cauchy law ``(1 + x^2/(2 beta - 1))^-beta`` with matching weight."""
    beta = float(beta)
    if not beta > 1.5:
        raise ValueError(f"cauchy-bl requires beta > 3/2, got {beta}")
    c2 = 2.0 * beta - 1.0
    c = math.sqrt(c2)
    return DiffusionModel(
        potential_v=lambda x: beta * _log1p_sq(_arr(x) / c),
        potential_v_prime=lambda x: 2.0 * beta * _arr(x) / (c2 + _arr(x) ** 2),
        potential_v_second=lambda x: 2.0 * beta * (c2 - _arr(x) ** 2) / (c2 + _arr(x) ** 2) ** 2,
        weight_sq=lambda x: 1.0 + _arr(x) ** 2 / c2,
        weight_sq_prime=lambda x: 2.0 * _arr(x) / c2,
        family=Family.CAUCHY_BL,
        param=beta,
        tail_decay=TailDecay("polynomial", 2.0 * beta, scale=c),
        metric=lambda x: c * np.arcsinh(_arr(x) / c),
        metric_inverse=lambda s: c * np.sinh(_arr(s) / c),
    )


def make_custom(v, v_prime, v_second, weight_sq, weight_sq_prime,
                tail_decay: TailDecay) -> DiffusionModel:
    """Wrap user-supplied callables.  Call :func:`validate` before relying on it."""
    if not isinstance(tail_decay, TailDecay):
        raise TypeError("tail_decay must be a TailDecay")
    return DiffusionModel(
        potential_v=v,
        potential_v_prime=v_prime,
        potential_v_second=v_second,
        weight_sq=weight_sq,
        weight_sq_prime=weight_sq_prime,
        family=Family.CUSTOM,
        tail_decay=tail_decay,
    )


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def drift(model: DiffusionModel, x):
    """Coefficient of ``f'`` in the generator: ``(sigma^2)' - sigma^2 V'``."""
    x = _arr(x)
    return model.weight_sq_prime(x) - model.weight_sq(x) * model.potential_v_prime(x)


def generator(model: DiffusionModel, f_prime, f_second, x):
    """Apply ``L`` pointwise given the first two derivatives of ``f``."""
    x = _arr(x)
    return model.weight_sq(x) * f_second(x) + drift(model, x) * f_prime(x)


def truncation_radius(model: DiffusionModel) -> float:
    """Radius ``R`` with ``mu(|x| > R)`` below 1e-12 (light tails) or 1e-8 (polynomial)."""
    tail = model.tail_decay
    if tail.kind == "bounded":
        return float(max(abs(model.support[0]), abs(model.support[1])))
    if tail.kind == "exp-power":
        p = tail.exponent
        # exp(-R^p/p) <= 1e-12 / e^2, generous for every normalisation in use
        return float((p * (12.0 * math.log(10.0) + 2.0)) ** (1.0 / p)) * tail.scale
    p = tail.exponent
    return float(tail.scale * (1e9 / (p - 1.0)) ** (1.0 / (p - 1.0)))


def metric_coordinate(model: DiffusionModel, x):
    """``s(x) = ∫_0^x du / sigma(u)``; closed form when known, else quadrature."""
    if model.metric is not None:
        return model.metric(x)
    from scipy.integrate import quad

    x = _arr(x)
    out = np.empty_like(x)
    for i, xi in np.ndenumerate(x):
        out[i] = quad(lambda u: 1.0 / math.sqrt(float(model.weight_sq(u))), 0.0, xi,
                      limit=200)[0]
    return out


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    witness: float | None = None


@dataclass
class ValidationReport:
    checks: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


COMPLETENESS_RATIO = 1.2
DERIVATIVE_RTOL = 1e-6


def _sample_points(model, rng):
    r = truncation_radius(model)
    if model.bounded:
        lo, hi = model.support
        pos = np.linspace(lo, hi, 201)[1:-1]
    else:
        r = min(r, 1e6)
        mag = np.geomspace(1e-3, r, 200)
        pos = np.concatenate([-mag[::-1], [0.0], mag])
    # a few random interior points in addition to the deterministic sweep
    extra = rng.uniform(-min(r, 10.0), min(r, 10.0), 32)
    return np.sort(np.concatenate([pos, extra]))


def _check_positivity(model, xs):
    vals = model.weight_sq(xs)
    bad = ~(np.isfinite(vals) & (vals > 0))
    if np.any(bad):
        w = float(xs[np.argmax(bad)])
        return CheckResult("positivity", False, f"sigma^2({w:g}) = {float(model.weight_sq(w)):g}", w)
    return CheckResult("positivity", True)


def _fd_mismatch(fn, dfn, xs, h_rel=1e-5):
    h = h_rel * np.maximum(1.0, np.abs(xs))
    fd = (fn(xs + h) - fn(xs - h)) / (2.0 * h)
    an = dfn(xs)
    err = np.abs(fd - an) / np.maximum(1.0, np.abs(an))
    i = int(np.argmax(err))
    return float(err[i]), float(xs[i])


def _check_derivatives(model, rng):
    if model.bounded:
        lo, hi = model.support
        xs = rng.uniform(0.9 * lo, 0.9 * hi, 64)
    else:
        # keep away from 0, where V'' of the exp-power law is singular for alpha < 2
        xs = rng.uniform(0.1, 5.0, 64) * rng.choice([-1.0, 1.0], 64)
    pairs = [
        ("V'", model.potential_v, model.potential_v_prime),
        ("V''", model.potential_v_prime, model.potential_v_second),
        ("(sigma^2)'", model.weight_sq, model.weight_sq_prime),
    ]
    for name, fn, dfn in pairs:
        err, where = _fd_mismatch(fn, dfn, xs)
        if not err <= DERIVATIVE_RTOL:
            return CheckResult("derivatives", False,
                               f"{name} disagrees with finite differences (rel {err:.2e})", where)
    return CheckResult("derivatives", True)


def _metric_integral(model, r):
    from scipy.integrate import quad

    def inv_sigma(u):
        return 1.0 / math.sqrt(float(model.weight_sq(u)))

    pts = [p for p in (1.0, 10.0, 100.0) if p < r]
    pos = quad(inv_sigma, 0.0, r, points=pts or None, limit=400)[0]
    neg = quad(lambda u: inv_sigma(-u), 0.0, r, points=pts or None, limit=400)[0]
    return min(pos, neg)


def _check_completeness(model):
    if model.bounded:
        # the bounded models carry reflecting boundaries instead
        return CheckResult("completeness", True, "bounded support")
    near = _metric_integral(model, 100.0)
    far = _metric_integral(model, 1000.0)
    ratio = far / near
    if ratio > COMPLETENESS_RATIO:
        return CheckResult("completeness", True, f"growth ratio {ratio:.3f}")
    return CheckResult("completeness", False,
                       f"∫du/sigma barely grows from R=100 to R=1000 (ratio {ratio:.4f})", 1000.0)


def validate(model: DiffusionModel, seed: int = 0) -> ValidationReport:
    """Ellipticity, derivative consistency and completeness of the sigma-metric."""
    rng = np.random.default_rng(seed)
    xs = _sample_points(model, rng)
    positivity = _check_positivity(model, xs)
    checks = [positivity, _check_derivatives(model, rng)]
    if positivity.passed:
        checks.append(_check_completeness(model))
    else:
        checks.append(CheckResult("completeness", False, "skipped: sigma^2 not positive"))
    return ValidationReport(checks)


# ---------------------------------------------------------------------------
# CLI addressing
# ---------------------------------------------------------------------------

_BUILDERS = {
    "exp-power": ("alpha", make_exp_power),
    "gauss-weighted": ("b", make_gaussian_weighted),
    "cauchy": ("beta", make_cauchy),
    "cauchy-bl": ("beta", make_cauchy_bl),
}

FAMILY_PARAMETERS = {name: key for name, (key, _) in _BUILDERS.items()}


def build_model(family: str, value: float) -> DiffusionModel:
    if family not in _BUILDERS:
        raise ValueError(f"unknown model family {family!r}")
    return _BUILDERS[family][1](value)


def parse_model(text: str) -> DiffusionModel:
    """Parse ``family:key=value`` (e.g. ``cauchy:beta=2``) or ``uniform``."""
    text = text.strip()
    if text == "uniform":
        return make_uniform()
    name, sep, rest = text.partition(":")
    if name not in _BUILDERS:
        raise ValueError(f"unknown model family {name!r}; expected one of "
                         f"{', '.join(sorted(_BUILDERS))} or 'uniform'")
    key, builder = _BUILDERS[name]
    if not sep:
        raise ValueError(f"missing parameter, expected '{name}:{key}=<value>'")
    k, eq, v = rest.partition("=")
    if not eq or k.strip() != key:
        raise ValueError(f"expected '{name}:{key}=<value>', got {text!r}")
    try:
        value = float(v)
    except ValueError:
        raise ValueError(f"parameter {key!r} is not a number: {v!r}") from None
    if name == "exp-power" and math.isinf(value):
        return make_uniform()
    return builder(value)
