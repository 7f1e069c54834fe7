"""Numerical verification of first-variation and co-area identities.

The directional derivative of the integral at f in direction g,
    lim_{t -> 0+} (integral(f * (t.g)) - integral(f)) / t,
is estimated from a geometric schedule of difference quotients with one
Richardson extrapolation step, and compared against the measure-side
prediction integral(h_g dS_f).  The two agree exactly when f is essentially
continuous, and the indicator counterexample (prediction 0, estimate 2)
shows the necessity of that condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    ExtendedGridFunction,
    Grid,
    LogConcaveFunction,
    PreconditionError,
    evaluate,
    gradient_map,
    integrate_exp_neg,
    superlevel_perimeter,
    support_boundary_mask,
)
from .legendre import lft
from .calculus import alexandrov, is_essentially_continuous, support_function
from .measures import DiscreteMeasure, integrate_against, surface_area_measure
from ._contour import weighted_boundary_measure

__all__ = [
    "VariationReport",
    "default_schedule",
    "first_variation_estimate",
    "first_variation_predicted",
    "first_variation_report",
    "lp_first_variation_predicted",
    "coarea_check",
    "CoareaReport",
    "subdifferential_check",
    "SubdifferentialReport",
    "pointwise_derivative_check",
    "PointwiseDerivativeReport",
]

RELATIVE_GAP_FLOOR = 1e-8


def default_schedule() -> np.ndarray:
    """Geometric one-sided schedule t_k = 2^-k, k = 3..10."""
    return 0.5 ** np.arange(3, 11)


@dataclass(frozen=True)
class VariationReport:
    """Difference-quotient trace of a one-sided derivative estimate."""

    t_schedule: np.ndarray
    difference_quotients: np.ndarray
    extrapolated_delta: float
    predicted: float
    relative_gap: float
    log_quotients_nondecreasing: bool = field(default=True)

    def __post_init__(self):
        t = np.asarray(self.t_schedule, dtype=float)
        if np.any(t <= 0) or np.any(np.diff(t) >= 0):
            raise PreconditionError("schedule must be strictly decreasing and positive")


def _check_schedule(schedule) -> np.ndarray:
    t = default_schedule() if schedule is None else np.asarray(schedule, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise PreconditionError("schedule must be strictly decreasing and positive")
    return t


def _quotients_and_extrapolation(integrals: np.ndarray, base: float, t: np.ndarray):
    quotients = (integrals - base) / t
    # divergence guard: quotient growth beyond 1/t reports +inf
    if np.any(quotients > 1.0 / t):
        return quotients, np.inf
    if len(t) >= 2:
        r = t[-2] / t[-1]
        extrap = (r * quotients[-1] - quotients[-2]) / (r - 1.0)
    else:
        extrap = quotients[-1]
    return quotients, float(extrap)


def _sup_convolution_integrals(f: LogConcaveFunction, g: LogConcaveFunction,
                               t: np.ndarray, dual: Grid | None):
    dual = dual or f.grid.mirrored()
    hf = support_function(f, dual)
    hg = support_function(g, dual)
    base = integrate_exp_neg(
        alexandrov(hf, f.grid).potential)
    ints = np.array([
        integrate_exp_neg(
            alexandrov(hf.with_values(hf.values + tk * hg.values), f.grid).potential)
        for tk in t
    ])
    return ints, base


def first_variation_report(f: LogConcaveFunction, g: LogConcaveFunction,
                           schedule=None, dual: Grid | None = None) -> VariationReport:
    """Estimate the first variation and compare with the surface-measure
    prediction.  Both integrals in the quotient go through the same transform
    route so the discretization bias cancels in the difference."""
    if not (0 < f.integral < np.inf and 0 < g.integral < np.inf):
        raise PreconditionError("need 0 < integral(f), integral(g) < inf")
    t = _check_schedule(schedule)
    ints, base = _sup_convolution_integrals(f, g, t, dual)
    quotients, extrap = _quotients_and_extrapolation(ints, base, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = (np.log(ints) - np.log(base)) / t
    # t decreasing, so nondecreasing in t means logq[k] >= logq[k+1] - tol
    mono = bool(np.all(np.diff(logq) <= 1e-6 * max(1.0, np.max(np.abs(logq)))))
    predicted = first_variation_predicted(f, g, dual=dual)
    gap = _relative_gap(extrap, predicted)
    return VariationReport(t, quotients, extrap, predicted, gap, mono)


def _relative_gap(estimate: float, predicted: float) -> float:
    if np.isinf(predicted) and np.isinf(estimate):
        return 0.0
    return float(abs(estimate - predicted) / max(abs(predicted), RELATIVE_GAP_FLOOR))


def first_variation_estimate(f: LogConcaveFunction, g: LogConcaveFunction,
                             schedule=None, dual: Grid | None = None) -> float:
    """Richardson-extrapolated one-sided derivative of t -> integral(f*(t.g))."""
    if not (0 < f.integral < np.inf and 0 < g.integral < np.inf):
        raise PreconditionError("need 0 < integral(f), integral(g) < inf")
    t = _check_schedule(schedule)
    ints, base = _sup_convolution_integrals(f, g, t, dual)
    _, extrap = _quotients_and_extrapolation(ints, base, t)
    return extrap


def first_variation_predicted(f: LogConcaveFunction, g: LogConcaveFunction,
                              dual: Grid | None = None) -> float:
    """Measure-side prediction: integral of h_g against the surface-area
    measure of f.  May legitimately be +inf."""
    dual = dual or f.grid.mirrored()
    hg = support_function(g, dual)
    sf = surface_area_measure(f)
    return integrate_against(hg, sf)


def lp_first_variation_predicted(f: LogConcaveFunction, g: LogConcaveFunction, p: float,
                                 dual: Grid | None = None) -> float:
    """(1/p) integral h_g^p h_f^(1-p) dS_f; reduces to the p = 1 prediction."""
    if not 0 < p <= 1:
        raise PreconditionError("p must lie in (0, 1]")
    dual = dual or f.grid.mirrored()
    hf = support_function(f, dual)
    hg = support_function(g, dual)
    sf = surface_area_measure(f)
    hf_at = np.asarray(evaluate(hf, sf.points), dtype=float)
    hg_at = np.asarray(evaluate(hg, sf.points), dtype=float)
    if np.any(hf_at < 0) or np.any(hg_at < 0):
        raise PreconditionError("Lp variation needs h_f, h_g >= 0 at the atoms")
    vals = np.power(hg_at, p) * np.power(hf_at, 1.0 - p) / p
    if np.any(np.isinf(vals)):
        return float(np.inf)
    return float(np.sum(vals * sf.weights))


@dataclass(frozen=True)
class CoareaReport:
    lhs: float            # integral over levels of the superlevel perimeter
    rhs_gradient: float   # integral of |grad f|
    rhs_boundary: float   # boundary trace term; 0 iff essentially continuous
    levels: int

    @property
    def rhs(self) -> float:
        return self.rhs_gradient + self.rhs_boundary


def coarea_check(f: LogConcaveFunction, levels: int = 64) -> CoareaReport:
    """Level-sweep of the perimeter against gradient-plus-boundary terms."""
    if not (0 < f.integral < np.inf):
        raise PreconditionError("need 0 < integral(f) < inf")
    top = f.max_value
    ts = (np.arange(levels) + 0.5) * top / levels
    lhs = float(sum(superlevel_perimeter(f, t) for t in ts) * (top / levels))
    gf = gradient_map(f.potential)
    speed = np.zeros(f.grid.shape)
    norms = np.linalg.norm(gf.vectors, axis=-1)
    speed[gf.mask] = norms[gf.mask] * f.density[gf.mask]
    rhs_grad = float(np.sum(speed * f.grid.quadrature_weights()))
    rhs_boundary = weighted_boundary_measure(f)
    return CoareaReport(lhs, rhs_grad, rhs_boundary, levels)


@dataclass(frozen=True)
class SubdifferentialReport:
    lhs: float
    rhs: float
    holds: bool


def subdifferential_check(f: LogConcaveFunction, g: LogConcaveFunction,
                          dual: Grid | None = None,
                          tol: float = 1e-8) -> SubdifferentialReport:
    """Checks log integral(f) - log integral(g) >= (1/integral f) *
    integral (h_f - h_g) dS_f, which expresses that the measure-side linear
    map lies in the subdifferential of the log-integral functional."""
    if not is_essentially_continuous(f):
        raise PreconditionError("subdifferential inequality needs an essentially continuous f")
    if not (0 < f.integral < np.inf and 0 < g.integral < np.inf):
        raise PreconditionError("need 0 < integral(f), integral(g) < inf")
    dual = dual or f.grid.mirrored()
    hf = support_function(f, dual)
    hg = support_function(g, dual)
    sf = surface_area_measure(f)
    lhs = float(np.log(f.integral) - np.log(g.integral))
    rhs_int = integrate_against(hf.with_values(hf.values - hg.values), sf)
    rhs = rhs_int / f.integral
    scale = max(1.0, abs(lhs), abs(rhs))
    return SubdifferentialReport(lhs, rhs, bool(lhs >= rhs - tol * scale))


@dataclass(frozen=True)
class PointwiseDerivativeReport:
    status: str                      # "ok" or "inconclusive"
    estimate: float
    predicted: float
    relative_gap: float
    quotients: np.ndarray


def pointwise_derivative_check(envelope: ExtendedGridFunction,
                               direction: ExtendedGridFunction,
                               x0, schedule=None,
                               primal: Grid | None = None) -> PointwiseDerivativeReport:
    """Finite differences of t -> (envelope + t * direction)*(x0) against the
    predicted one-sided derivative -direction(grad of the conjugate at x0).

    Neither input needs to be convex; the direction must be bounded below and
    both must be finite at the origin.  Inconclusive when x0 is boundary
    flagged or the conjugate has no gradient there.
    """
    if envelope.grid.dim != direction.grid.dim or envelope.grid != direction.grid:
        raise PreconditionError("envelope and direction must share a grid")
    dvals = direction.values
    if not np.isfinite(dvals).all() and np.any(dvals == np.inf):
        pass  # +inf allowed pointwise; boundedness below is guaranteed by type
    origin = np.zeros(envelope.grid.dim)
    if not (np.isfinite(evaluate(envelope, origin)) and np.isfinite(evaluate(direction, origin))):
        raise PreconditionError("envelope and direction must be finite at the origin")
    t = _check_schedule(schedule)
    primal = primal or envelope.grid.mirrored()
    base_res = lft(envelope, primal)
    gf = gradient_map(base_res.function)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))

    # nearest node for flag/gradient lookups
    idx = tuple(int(np.argmin(np.abs(ax - c))) for ax, c in zip(primal.axes, x0))
    if base_res.boundary[idx] or not gf.mask[idx]:
        return PointwiseDerivativeReport("inconclusive", np.nan, np.nan, np.nan,
                                         np.full(len(t), np.nan))
    grad_x0 = gf.vectors[idx]
    predicted = -float(np.asarray(evaluate(direction, grad_x0), dtype=float))
    base_val = float(evaluate(base_res.function, x0))
    vals = np.array([
        float(evaluate(lft(envelope.with_values(envelope.values + tk * dvals),
                           primal).function, x0))
        for tk in t
    ])
    quotients, extrap = _quotients_and_extrapolation(vals, base_val, t)
    gap = _relative_gap(extrap, predicted)
    return PointwiseDerivativeReport("ok", extrap, predicted, gap, quotients)
