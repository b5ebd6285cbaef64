"""Spectral gaps of weighted one-dimensional diffusion operators.

``L f = sigma^2 f'' + ((sigma^2)' - sigma^2 V') f'`` is symmetric in
``L^2(mu)`` with ``mu ∝ exp(-V)``.  The package brackets its spectral gap from
both sides (intertwining lower bounds, Rayleigh upper bounds) and computes it
numerically from a finite-volume discretisation.
"""

from .closed_form import TheoremValue, theorem_for
from .intertwining import best_lower, inf_v_f, optimize_epsilon, poisson_lower_bound, v_f_eps
from .models import (
    DiffusionModel,
    EstimateKind,
    Family,
    GapEstimate,
    TailDecay,
    make_cauchy,
    make_cauchy_bl,
    make_custom,
    make_exp_power,
    make_gaussian_weighted,
    make_uniform,
    parse_model,
    validate,
)
from .rayleigh import TestFunction, best_upper, rayleigh_quotient
from .spectral import BACKEND, spectral_gap_numeric

__all__ = [
    "BACKEND",
    "DiffusionModel",
    "EstimateKind",
    "Family",
    "GapEstimate",
    "TailDecay",
    "TestFunction",
    "TheoremValue",
    "best_lower",
    "best_upper",
    "inf_v_f",
    "make_cauchy",
    "make_cauchy_bl",
    "make_custom",
    "make_exp_power",
    "make_gaussian_weighted",
    "make_uniform",
    "optimize_epsilon",
    "parse_model",
    "poisson_lower_bound",
    "rayleigh_quotient",
    "spectral_gap_numeric",
    "theorem_for",
    "v_f_eps",
    "validate",
]

__version__ = "0.1.0"
