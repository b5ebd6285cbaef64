"""Log-Gamma on the positive axis and two classical Gamma-ratio inequalities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_{2k} / (2k (2k-1)) for k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

# Below this the argument is shifted upward before the asymptotic series is used;
# at 15 the first omitted term is ~1e-20.
_SHIFT_TO = 15.0


def _stirling(z):
    inv = 1.0 / z
    inv2 = inv * inv
    series = 0.0
    for c in reversed(_STIRLING):
        series = series * inv2 + c
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + series * inv


def log_gamma(z):
    """Natural log of Gamma(z) for real z > 0 (scalar or array)."""
    arr = np.asarray(z, dtype=float)
    if np.any(~(arr > 0.0)):
        raise ValueError("log_gamma is defined here only for z > 0")
    shift = np.where(arr < _SHIFT_TO, np.ceil(_SHIFT_TO - arr), 0.0)
    w = arr + shift
    # log(z (z+1) ... (z+k-1)) accumulated as a product; at most 15 factors
    prod = np.ones_like(arr)
    k = np.zeros_like(arr)
    while np.any(k < shift):
        active = k < shift
        prod = np.where(active, prod * (arr + k), prod)
        k = k + 1.0
    out = _stirling(w) - np.log(prod)
    if np.ndim(z) == 0:
        return float(out)
    return out


def gamma_ratio(a, b):
    """Gamma(a) / Gamma(b) via log-Gamma."""
    return np.exp(log_gamma(a) - log_gamma(b))


class BoundKind(enum.Enum):
    KERSHAW = "kershaw"
    LOG_CONVEX = "log-convex"


@dataclass(frozen=True)
class GammaRatioBound:
    a: float
    b_param: float
    bound_value: float
    kind: BoundKind


def _check_kershaw(a, b):
    if not (a > 0.0 and b >= 1.0 and a <= b <= a + 1.0):
        raise ValueError(f"Kershaw bound needs a>0, b>=1, a<=b<=a+1; got a={a}, b={b}")


def kershaw_bound(a: float, b: float) -> float:
    """Upper bound ``((a+b-1)/2)^(a-b)`` for Gamma(a)/Gamma(b)."""
    _check_kershaw(a, b)
    return ((a + b - 1.0) / 2.0) ** (a - b)


def logconvex_bound(a: float, b: float) -> float:
    """Upper bound ``((a+b)/a)^(1-b)`` for Gamma(a) a^b / Gamma(a+b), 0 <= b <= 1."""
    if not (a > 0.0 and 0.0 <= b <= 1.0):
        raise ValueError(f"log-convexity bound needs a>0, 0<=b<=1; got a={a}, b={b}")
    return ((a + b) / a) ** (1.0 - b)


def kershaw(a: float, b: float) -> GammaRatioBound:
    return GammaRatioBound(a, b, kershaw_bound(a, b), BoundKind.KERSHAW)


def logconvex(a: float, b: float) -> GammaRatioBound:
    return GammaRatioBound(a, b, logconvex_bound(a, b), BoundKind.LOG_CONVEX)


def kershaw_lhs(a: float, b: float) -> float:
    return float(gamma_ratio(a, b))


def logconvex_lhs(a: float, b: float) -> float:
    return float(np.exp(log_gamma(a) + b * math.log(a) - log_gamma(a + b)))
