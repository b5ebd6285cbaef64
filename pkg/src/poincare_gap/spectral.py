"""Finite-volume discretisation of ``-L`` and its smallest nonzero eigenvalue.

The operator is discretised in the sigma-metric coordinate ``s`` (``ds = dx/sigma``).
There the Dirichlet form becomes ``∫ (df/ds)^2 w(s) ds`` and the variance is taken
against ``w(s) ds`` with the single weight ``w = exp(-V) sigma``, so ``-L`` is the
plain weighted Laplacian ``-(w f_s)_s / w``.  Cell-centred nodes on a uniform
``s``-mesh with reflecting ends give a symmetric tridiagonal matrix whose kernel
is spanned by the constants; its second eigenvalue approximates the gap.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .models import (
    DiffusionModel,
    EstimateKind,
    Family,
    GapEstimate,
    truncation_radius,
)

log = logging.getLogger(__name__)

if os.environ.get("POINCARE_GAP_PURE_PYTHON"):
    from . import _fallback as _kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels
        BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _fallback as _kernels
        BACKEND = "python"


class AssemblyError(ValueError):
    pass


class KernelViolation(RuntimeError):
    """The constant vector is not (numerically) in the kernel."""


@dataclass(frozen=True)
class Grid:
    """Cell-centred grid, uniform in the metric coordinate ``s``.

    Weights are kept as logarithms; far in the tails they underflow long before
    the discretised operator stops being well conditioned.
    """

    s_nodes: np.ndarray
    nodes: np.ndarray
    h: float
    log_node_weights: np.ndarray
    log_edge_conductances: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def node_weights(self) -> np.ndarray:
        return np.exp(self.log_node_weights)

    @property
    def edge_conductances(self) -> np.ndarray:
        return np.exp(self.log_edge_conductances)


@dataclass(frozen=True)
class SymmetricTridiagonal:
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        if self.off_diagonal.size != self.diagonal.size - 1:
            raise ValueError("off-diagonal must be one shorter than the diagonal")

    @property
    def size(self) -> int:
        return self.diagonal.size

    def norm(self) -> float:
        """Infinity norm (max absolute row sum)."""
        e = np.abs(self.off_diagonal)
        row = np.abs(self.diagonal).copy()
        row[:-1] += e
        row[1:] += e
        return float(row.max())

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out

    def dense(self) -> np.ndarray:
        return (np.diag(self.diagonal) + np.diag(self.off_diagonal, 1)
                + np.diag(self.off_diagonal, -1))


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

def _metric_inverse(model: DiffusionModel, s):
    if model.metric_inverse is not None:
        return model.metric_inverse(s)
    from scipy.integrate import solve_ivp

    # x(s) solves dx/ds = sigma(x), x(0) = 0
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)

    def rhs(_, x):
        return np.sqrt(model.weight_sq(x))

    for mask in (s > 0, s < 0):
        if not np.any(mask):
            continue
        targets = s[mask]
        order = np.argsort(np.abs(targets))
        sol = solve_ivp(rhs, (0.0, targets[order[-1]]), [0.0], method="DOP853",
                        t_eval=targets[order], rtol=1e-12, atol=1e-12)
        if not sol.success:
            raise AssemblyError(f"metric map could not be inverted: {sol.message}")
        vals = np.empty_like(targets)
        vals[order] = sol.y[0]
        out[mask] = vals
    return out


def _s_interval(model: DiffusionModel, radius: float | None):
    if model.bounded:
        lo, hi = model.support
        return float(model.metric(np.array(lo))), float(model.metric(np.array(hi)))
    from .models import metric_coordinate

    r = float(radius)
    return float(metric_coordinate(model, np.array(-r))), float(metric_coordinate(model, np.array(r)))


def _log_w(model: DiffusionModel, x):
    with np.errstate(over="ignore", divide="ignore"):
        return -model.potential_v(x) + 0.5 * np.log(model.weight_sq(x))


def build_grid_s(model: DiffusionModel, s_lo: float, s_hi: float, n: int) -> Grid:
    """Grid of ``n`` cells on ``[s_lo, s_hi]`` in the metric coordinate."""
    if n < 3:
        raise ValueError("need at least 3 cells")
    h = (s_hi - s_lo) / n
    half = s_lo + 0.5 * h * np.arange(2 * n + 1)
    x_half = _metric_inverse(model, half)
    lw = _log_w(model, x_half)
    if not np.all(np.isfinite(lw[1:-1])):
        bad = int(np.argmax(~np.isfinite(lw[1:-1]))) + 1
        raise AssemblyError(f"non-finite weight at x={x_half[bad]:g}")
    lw_nodes = lw[1::2]
    lw_edges = lw[2:-1:2]
    log_z = float(logsumexp(lw_nodes)) + math.log(h)
    return Grid(
        s_nodes=half[1::2],
        nodes=x_half[1::2],
        h=h,
        log_node_weights=lw_nodes + math.log(h) - log_z,
        log_edge_conductances=lw_edges - math.log(h) - log_z,
    )


def build_grid(model: DiffusionModel, radius: float, n: int) -> Grid:
    """Grid over ``[-radius, radius]`` (the support for bounded models), uniform in ``s``.

    ``n`` even keeps the origin off the nodes for symmetric models.
    """
    if n < 64 or n % 2:
        raise ValueError(f"n must be an even integer >= 64, got {n}")
    s_lo, s_hi = _s_interval(model, radius)
    return build_grid_s(model, s_lo, s_hi, n)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def assemble_from_log_weights(log_weights, log_conductances) -> SymmetricTridiagonal:
    """``M^{-1/2} K M^{-1/2}`` for masses ``M`` and the reflecting Laplacian ``K``."""
    lm = np.asarray(log_weights, dtype=float)
    lc = np.asarray(log_conductances, dtype=float)
    if lc.size != lm.size - 1:
        raise AssemblyError("need one conductance per interior edge")
    if not (np.all(np.isfinite(lm)) and np.all(np.isfinite(lc))):
        raise AssemblyError("nonpositive or non-finite weight/conductance")
    diag = np.zeros_like(lm)
    with np.errstate(over="ignore"):
        diag[:-1] += np.exp(lc - lm[:-1])
        diag[1:] += np.exp(lc - lm[1:])
        off = -np.exp(lc - 0.5 * (lm[:-1] + lm[1:]))
        if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off * off))):
            raise AssemblyError("matrix entries overflow; the truncation radius is too large")
    return SymmetricTridiagonal(diag, off)


def assemble_from_weights(weights, conductances) -> SymmetricTridiagonal:
    w = np.asarray(weights, dtype=float)
    c = np.asarray(conductances, dtype=float)
    if np.any(w <= 0) or np.any(c <= 0):
        raise AssemblyError("weights and conductances must be positive")
    return assemble_from_log_weights(np.log(w), np.log(c))


def assemble(model: DiffusionModel, grid: Grid) -> SymmetricTridiagonal:
    return assemble_from_log_weights(grid.log_node_weights, grid.log_edge_conductances)


def quadratic_form(grid: Grid, v) -> float:
    """Discrete Dirichlet energy ``sum c_{i+1/2} (v_{i+1} - v_i)^2``."""
    dv = np.diff(np.asarray(v, dtype=float))
    return float(np.sum(grid.edge_conductances * dv * dv))


def discrete_generator(grid: Grid, v) -> np.ndarray:
    """Apply the discretised ``L`` to nodal values ``v``."""
    v = np.asarray(v, dtype=float)
    flux = np.exp(grid.log_edge_conductances) * np.diff(v)
    out = np.zeros_like(v)
    out[:-1] += flux
    out[1:] -= flux
    return out / np.exp(grid.log_node_weights)


# ---------------------------------------------------------------------------
# eigenvalues
# ---------------------------------------------------------------------------

def _gershgorin(t: SymmetricTridiagonal):
    e = np.abs(t.off_diagonal)
    rad = np.zeros_like(t.diagonal)
    rad[:-1] += e
    rad[1:] += e
    return float(np.min(t.diagonal - rad)), float(np.max(t.diagonal + rad))


def _pivmin(t: SymmetricTridiagonal) -> float:
    e2max = float(np.max(t.off_diagonal ** 2)) if t.off_diagonal.size else 0.0
    return np.finfo(float).tiny * max(1.0, e2max)


def sturm_count(t: SymmetricTridiagonal, x: float) -> int:
    """Number of eigenvalues of ``t`` strictly below ``x``."""
    offsq = np.ascontiguousarray(t.off_diagonal ** 2)
    return int(_kernels.sturm_count(np.ascontiguousarray(t.diagonal), offsq, float(x),
                                    _pivmin(t)))


def tridiagonal_eigenvalue(t: SymmetricTridiagonal, k: int, tol: float | None = None) -> float:
    """Eigenvalue number ``k`` (0-based, ascending) by Sturm bisection."""
    if not 0 <= k < t.size:
        raise IndexError(k)
    lo, hi = _gershgorin(t)
    if tol is None:
        tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
    diag = np.ascontiguousarray(t.diagonal)
    offsq = np.ascontiguousarray(t.off_diagonal ** 2)
    return float(_kernels.bisect_eigenvalue(diag, offsq, k, lo, hi, float(tol), _pivmin(t)))


@dataclass(frozen=True)
class EigenResult:
    gap: float
    kernel: float
    third: float
    norm: float

    @property
    def near_degenerate(self) -> bool:
        return self.third - self.gap <= 1e-12 * self.norm


def eigen_bottom(t: SymmetricTridiagonal, tol: float | None = None) -> EigenResult:
    norm = t.norm()
    if tol is None:
        tol = 1e-12 * norm
    lam0 = tridiagonal_eigenvalue(t, 0, tol)
    if abs(lam0) > max(1e-10 * norm, tol):
        raise KernelViolation(f"assembly kernel violated: smallest eigenvalue {lam0:.3e}")
    lam1 = tridiagonal_eigenvalue(t, 1, tol)
    lam2 = tridiagonal_eigenvalue(t, 2, tol) if t.size > 2 else math.inf
    return EigenResult(lam1, lam0, lam2, norm)


def eigen_smallest_nonzero(t: SymmetricTridiagonal, tol: float | None = None) -> float:
    """Second-smallest eigenvalue; the smallest must vanish to ``tol``."""
    return eigen_bottom(t, tol).gap


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

QUALITY_CELLS = {"fast": 2000, "standard": 8000, "high": 32000}

# Half-width of the computational interval in the metric coordinate for
# families whose gap sits at (or next to) the bottom of the essential spectrum.
# There the truncation error decays only like (pi / S)^2.
# Light tails use the tail-mass radius instead: going further only adds cells
# where exp(-V) varies by many orders of magnitude per cell.
ESSENTIAL_S_RADIUS = 300.0


def default_s_radius(model: DiffusionModel) -> float:
    fam, p = model.family, model.param
    if fam in (Family.CAUCHY, Family.CAUCHY_BL, Family.GAUSSIAN_WEIGHTED):
        return ESSENTIAL_S_RADIUS
    if fam is Family.EXP_POWER and p == 1.0:
        return ESSENTIAL_S_RADIUS
    from .models import metric_coordinate

    r = truncation_radius(model)
    return float(metric_coordinate(model, np.array(r)))


def gap_at(model: DiffusionModel, n: int, s_radius: float | None = None) -> EigenResult:
    """Raw (non-extrapolated) discrete gap on ``n`` cells."""
    if model.bounded:
        s_lo, s_hi = _s_interval(model, None)
    else:
        s = default_s_radius(model) if s_radius is None else s_radius
        s_lo, s_hi = -s, s
    return eigen_bottom(assemble(model, build_grid_s(model, s_lo, s_hi, n)))


def spectral_gap_numeric(model: DiffusionModel, quality: str = "standard",
                         s_radius: float | None = None) -> GapEstimate:
    """Gap from two mesh sizes (Richardson) and two truncation radii.

    The error bar is the larger of the extrapolation correction and the change
    observed when the radius is halved at fixed mesh size.
    """
    if quality not in QUALITY_CELLS:
        raise ValueError(f"quality must be one of {sorted(QUALITY_CELLS)}")
    n = QUALITY_CELLS[quality]
    if model.bounded:
        fine = gap_at(model, n)
        coarse = gap_at(model, n // 2)
        radius_delta = 0.0
        s = None
    else:
        s = default_s_radius(model) if s_radius is None else s_radius
        fine = gap_at(model, n, s)
        coarse = gap_at(model, n // 2, s)
        # same mesh size as `coarse` on a shorter interval
        shrink = 0.5 if s >= ESSENTIAL_S_RADIUS else 0.8
        cells = 2 * max(2, round(shrink * n / 4))
        shorter = gap_at(model, cells, s * cells / (n // 2))
        radius_delta = abs(coarse.gap - shorter.gap)
    extrapolated = fine.gap + (fine.gap - coarse.gap) / 3.0
    extrap_delta = abs(extrapolated - fine.gap)
    flags = []
    if fine.near_degenerate:
        flags.append("near-degenerate")
    if fine.gap > coarse.gap * (1 + 1e-3) and radius_delta == 0.0:
        flags.append("non-monotone refinement")
    error = max(extrap_delta, radius_delta)
    where = "bounded" if s is None else f"S={s:g}"
    return GapEstimate(
        value=max(extrapolated, 0.0),
        kind=EstimateKind.NUMERICAL,
        method=f"discretization {where}, n={n} ({BACKEND})",
        error=error,
        flags=tuple(flags),
    )
