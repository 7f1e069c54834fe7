"""Surface-area measures of log-concave functions as discrete atom clouds.

The measure of f = exp(-pot) is the push-forward of f dx under the gradient
of the potential: one atom per support node where a finite-difference
gradient exists, located at that gradient, weighted by f times the node's
quadrature weight.  Total mass therefore matches the trapezoid integral of f
up to summation order.  Indicators concentrate at the origin; the standard
Gaussian reproduces its own density.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import (
    ExtendedGridFunction,
    Grid,
    LogConcaveFunction,
    PreconditionError,
    evaluate,
    gradient_map,
)
from .legendre import lft

__all__ = [
    "DiscreteMeasure",
    "surface_area_measure",
    "lp_surface_area_measure",
    "integrate_against",
    "measure_distance",
    "MeasureDistance",
    "binned_density",
]


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms in R^n; weights strictly positive."""

    points: np.ndarray        # (m, dim)
    weights: np.ndarray       # (m,)
    even: bool = False

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(pts) != len(w):
            raise PreconditionError("points and weights must have equal length")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise PreconditionError("weights must be finite and strictly positive")
        if np.any(~np.isfinite(pts)):
            raise PreconditionError("atom locations must be finite")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def scaled(self, factor: float) -> "DiscreteMeasure":
        if factor <= 0:
            raise PreconditionError("scale factor must be > 0")
        return DiscreteMeasure(self.points, self.weights * factor, self.even)

    def pairing_defect(self) -> float:
        """Largest unmatched mass under the x -> -x pairing (0 for even)."""
        mirrored = sorted(zip(map(tuple, np.round(-self.points, 9)), self.weights))
        direct = sorted(zip(map(tuple, np.round(self.points, 9)), self.weights))
        worst = 0.0
        for (pa, wa), (pb, wb) in zip(direct, mirrored):
            if pa != pb:
                return float("inf")
            worst = max(worst, abs(wa - wb))
        return worst


def surface_area_measure(f: LogConcaveFunction) -> DiscreteMeasure:
    """Push-forward of f dx under the potential's gradient map."""
    total = f.integral
    if not (0 < total < np.inf):
        raise PreconditionError("need 0 < integral(f) < inf")
    gf = gradient_map(f.potential)
    w = (f.density * f.grid.quadrature_weights())[gf.mask]
    pts = gf.vectors[gf.mask]
    keep = w > 0.0
    even = f.is_even
    return DiscreteMeasure(pts[keep], w[keep], even=even)


def lp_surface_area_measure(f: LogConcaveFunction, p: float,
                            dual: Grid | None = None) -> DiscreteMeasure:
    """Reweights each surface-area atom at location y by h_f(y)^(1-p).

    Atoms where h_f vanishes (weight 0^(1-p) = 0) are dropped.  An atom with
    non-negligible weight where h_f = +inf is an error: the support function
    must be finite at almost every atom for the measure to exist.
    """
    if not 0 < p < 1:
        raise PreconditionError("p must lie in (0, 1)")
    base = surface_area_measure(f)
    dual = dual or f.grid.mirrored()
    h = lft(f.potential, dual).function
    hv = np.asarray(evaluate(h, base.points), dtype=float)
    tol = 1e-12 * max(1.0, base.total_mass)
    if np.any(np.isinf(hv) & (base.weights > tol)):
        raise PreconditionError(
            "support function is +inf at an atom with positive weight; "
            "the Lp surface-area measure is undefined for this function")
    scale_tol = 1e-12 * max(1.0, float(np.max(hv[np.isfinite(hv)], initial=1.0)))
    if np.any(hv < -scale_tol):
        raise PreconditionError("Lp reweighting needs h_f >= 0 at every atom")
    hv = np.clip(hv, 0.0, None)
    w = base.weights * np.power(hv, 1.0 - p)
    keep = w > 0.0
    return DiscreteMeasure(base.points[keep], w[keep], even=base.even)


def integrate_against(rho, measure: DiscreteMeasure) -> float:
    """Sum of rho(atom) * weight; +inf if rho hits +inf with positive weight.

    ``rho`` is either a callable on (m, dim) arrays (or per-point scalars) or
    an :class:`ExtendedGridFunction` evaluated by interpolation.
    """
    pts = measure.points
    if isinstance(rho, ExtendedGridFunction):
        vals = np.asarray(evaluate(rho, pts), dtype=float)
    else:
        vals = np.asarray(rho(pts if pts.shape[1] > 1 else pts[:, 0]), dtype=float)
    vals = np.broadcast_to(vals, measure.weights.shape)
    if np.any(np.isinf(vals)):
        return float(np.inf)
    return float(np.sum(vals * measure.weights))


@dataclass(frozen=True)
class MeasureDistance:
    l1: float
    wasserstein1: float | None  # 1D only


def _bin_edges(bins: Grid):
    edges = []
    for ax, h in zip(bins.axes, bins.spacing):
        edges.append(np.concatenate([ax - h / 2, [ax[-1] + h / 2]]))
    return edges


def measure_distance(m1: DiscreteMeasure, m2: DiscreteMeasure, bins: Grid) -> MeasureDistance:
    """L1 distance between node-centred histogram masses (right-open bins);
    in 1D also the Wasserstein-1 distance via the CDF difference."""
    if m1.dim != m2.dim:
        raise PreconditionError("measures must share a dimension")
    edges = _bin_edges(bins)
    if bins.dim == 1:
        h1, _ = np.histogram(m1.points[:, 0], bins=edges[0], weights=m1.weights)
        h2, _ = np.histogram(m2.points[:, 0], bins=edges[0], weights=m2.weights)
    else:
        h1, _, _ = np.histogram2d(m1.points[:, 0], m1.points[:, 1],
                                  bins=edges, weights=m1.weights)
        h2, _, _ = np.histogram2d(m2.points[:, 0], m2.points[:, 1],
                                  bins=edges, weights=m2.weights)
    l1 = float(np.abs(h1 - h2).sum())
    w1 = _wasserstein_1d(m1, m2) if bins.dim == 1 else None
    return MeasureDistance(l1, w1)


def _wasserstein_1d(m1: DiscreteMeasure, m2: DiscreteMeasure) -> float:
    # integral of |CDF1 - CDF2| over the merged breakpoints
    x = np.concatenate([m1.points[:, 0], m2.points[:, 0]])
    s = np.concatenate([m1.weights, -m2.weights])
    order = np.argsort(x, kind="stable")
    x, s = x[order], s[order]
    cdf_gap = np.cumsum(s)[:-1]
    return float(np.sum(np.abs(cdf_gap) * np.diff(x)))


def binned_density(measure: DiscreteMeasure, bins: Grid):
    """Piecewise-constant density estimate of a measure (1D).

    Bin edges sit at ``bins`` nodes shifted by half a spacing so that atoms
    produced by grid pushforwards land strictly inside bins.  Returns a
    callable usable as a density argument elsewhere.
    """
    if bins.dim != 1 or measure.dim != 1:
        raise PreconditionError("binned_density is 1D only")
    ax = bins.axes[0]
    h = bins.spacing[0]
    edges = ax + h / 2
    mass, _ = np.histogram(measure.points[:, 0], bins=edges, weights=measure.weights)
    dens = mass / h

    def density(y):
        q = np.asarray(y, dtype=float)
        j = np.clip(np.searchsorted(edges, q, side="right") - 1, 0, len(dens) - 1)
        out = dens[j]
        return float(out) if np.ndim(y) == 0 else out

    return density
