"""Integrals against ``mu`` on a (self-extending) truncated domain.

Polynomially decaying laws are integrated in ``t = arcsinh(x / scale)``, where
their densities become exponentially small; light-tailed laws are integrated in
``x`` directly.  Each half-line is handled separately so that kinks at the origin
(``|x|`` for the double-exponential law) fall on a panel boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .models import DiffusionModel, truncation_radius


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    truncation_radius: float | None = None
    panels: int = 16
    rule: str = "adaptive-bisection"
    rel_tol: float = 1e-10
    nodes_per_panel: int = 10
    max_panels: int = 200_000
    # keep integrating past the truncation radius while the tail still contributes
    extend_tail: bool = True

    def __post_init__(self):
        if self.rule not in ("adaptive-bisection", "composite-gauss"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.rel_tol < 1e-13:
            raise ValueError("rel_tol below 1e-13 is not attainable in double precision")
        if self.panels < 8:
            raise ValueError("need at least 8 panels")
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise ValueError("truncation radius must be positive")


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _panel_sums(func, a, b, n):
    """Gauss-Legendre estimate on each panel ``[a_k, b_k]``."""
    nodes, weights = _gauss_legendre(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        vals = func(x.ravel()).reshape(x.shape)
    if not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(vals)][0]
        raise QuadratureError(f"integrand is not finite at {bad:g}")
    return half * (vals @ weights)


def integrate_interval(func, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_SPEC,
                       scale: float | None = None) -> float:
    """``∫_lo^hi func``; ``scale`` sets the absolute tolerance (defaults to the first pass)."""
    edges = np.linspace(lo, hi, spec.panels + 1)
    a, b = edges[:-1], edges[1:]
    n = spec.nodes_per_panel
    if spec.rule == "composite-gauss":
        return math.fsum(_panel_sums(func, a, b, n))

    coarse = _panel_sums(func, a, b, n)
    if scale is None:
        scale = abs(math.fsum(coarse))
    length = hi - lo
    accepted = []
    total = len(a)
    while a.size:
        m = 0.5 * (a + b)
        left = _panel_sums(func, a, m, n)
        right = _panel_sums(func, m, b, n)
        fine = left + right
        budget = spec.rel_tol * max(scale, 1e-300) * (b - a) / length
        ok = np.abs(fine - coarse) <= budget
        accepted.extend(fine[ok].tolist())
        bad = ~ok
        total += 2 * int(bad.sum())
        if total > spec.max_panels:
            raise QuadratureError(f"no convergence within {spec.max_panels} panels")
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    return math.fsum(accepted)


# ---------------------------------------------------------------------------
# model-aware integration
# ---------------------------------------------------------------------------

_MAX_T = 340.0  # sinh(t)^2 stays finite


def _coordinate(model: DiffusionModel):
    """(x(t), dx/dt, t(x), upper limit for t) for the integration variable."""
    tail = model.tail_decay
    if tail.kind == "polynomial":
        c = tail.scale
        return (lambda t: c * np.sinh(t), lambda t: c * np.cosh(t),
                lambda x: math.asinh(x / c), _MAX_T)
    return (lambda t: t, np.ones_like, lambda x: x, math.inf)


def _half_line(integrand, t0, t_max, spec, sign):
    """``∫_0^inf`` (sign=+1) or ``∫_-inf^0`` of ``integrand(t)`` with tail extension."""
    def f(t):
        return integrand(sign * t)

    value = integrate_interval(f, 0.0, t0, spec)
    if not spec.extend_tail:
        return value
    lo = t0
    for _ in range(12):
        hi = min(2.0 * lo, t_max)
        if hi <= lo:
            break
        piece = integrate_interval(f, lo, hi, spec, scale=abs(value))
        value += piece
        if abs(piece) <= spec.rel_tol * abs(value):
            return value
        lo = hi
    raise QuadratureError("integrand does not decay within the representable range")


def integrate_density(model: DiffusionModel, g, spec: QuadratureSpec = DEFAULT_SPEC,
                      squared: bool = False) -> float:
    """``∫ g(x) exp(-V(x)) dx`` over the support, or ``∫ g^2 exp(-V)`` if ``squared``.

    The squared form multiplies ``g`` by ``exp(-V/2)`` before squaring, so that
    fast-growing test functions do not overflow where the product is still tiny.
    """
    x_of, jac, t_of, t_max = _coordinate(model)

    def integrand(t):
        x = x_of(t)
        if squared:
            root = np.exp(-0.5 * model.potential_v(x)) * np.sqrt(jac(t))
            return np.where(root > 0.0, (g(x) * root) ** 2, 0.0)
        dens = np.exp(-model.potential_v(x)) * jac(t)
        # an underflowed density must not turn an overflowing g into inf * 0
        return np.where(dens > 0.0, g(x) * dens, 0.0)

    if model.bounded:
        lo, hi = model.support
        return math.fsum([integrate_interval(integrand, lo, 0.0, spec),
                          integrate_interval(integrand, 0.0, hi, spec)])
    r = spec.truncation_radius or truncation_radius(model)
    t0 = t_of(r)
    return math.fsum([_half_line(integrand, t0, t_max, spec, -1.0),
                      _half_line(integrand, t0, t_max, spec, 1.0)])


def _ones(x):
    return np.ones_like(x)


def normalizing_constant(model: DiffusionModel, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``Z = ∫ exp(-V)``."""
    return integrate_density(model, _ones, spec)


def integrate_mu(model: DiffusionModel, g, spec: QuadratureSpec = DEFAULT_SPEC,
                 z: float | None = None) -> float:
    """``∫ g dmu`` for the normalised measure."""
    if z is None:
        z = normalizing_constant(model, spec)
    return integrate_density(model, g, spec) / z


def mean(model, f, spec=DEFAULT_SPEC, z=None) -> float:
    return integrate_mu(model, f.f, spec, z)


def variance(model: DiffusionModel, f, spec: QuadratureSpec = DEFAULT_SPEC,
             z: float | None = None) -> float:
    """``Var_mu(f)``, computed in centred form."""
    if z is None:
        z = normalizing_constant(model, spec)
    m = integrate_mu(model, f.f, spec, z)
    var = integrate_density(model, lambda x: f.f(x) - m, spec, squared=True) / z
    if var < -1e-12:
        raise QuadratureError(f"negative variance {var:g}")
    return max(var, 0.0)


def energy(model: DiffusionModel, f, spec: QuadratureSpec = DEFAULT_SPEC,
           z: float | None = None) -> float:
    """Dirichlet energy ``∫ sigma^2 f'^2 dmu``."""
    if z is None:
        z = normalizing_constant(model, spec)
    val = integrate_density(model, lambda x: np.sqrt(model.weight_sq(x)) * f.f_prime(x),
                            spec, squared=True) / z
    if val < -1e-12:
        raise QuadratureError(f"negative energy {val:g}")
    return max(val, 0.0)
