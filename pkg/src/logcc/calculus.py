"""Operations on log-concave functions: support function, Alexandrov function,
sup-convolution, dilation, Lp combination, essential continuity.

Sup-convolution goes through support functions, h_{f*g} = h_f + h_g, which
costs two transforms instead of the quadratic direct supremum.
"""

from __future__ import annotations

import numpy as np

from .grid import (
    ExtendedGridFunction,
    Grid,
    LogConcaveFunction,
    PreconditionError,
    TOL_EC_REL,
    evaluate,
    integrate_exp_neg,
    support_boundary_mask,
)
from .legendre import biconjugate, lft

__all__ = [
    "support_function",
    "alexandrov",
    "sup_convolution",
    "scale",
    "lp_combination",
    "is_essentially_continuous",
    "log_integral_functional",
]


def support_function(f: LogConcaveFunction, dual: Grid | None = None) -> ExtendedGridFunction:
    """h_f = conjugate of the potential; h_f(0) = log max f."""
    if not f.support_mask.any():
        raise PreconditionError("function has empty support")
    return lft(f.potential, dual).function


def alexandrov(envelope: ExtendedGridFunction, primal: Grid | None = None) -> LogConcaveFunction:
    """The largest log-concave function whose support function is <= envelope,
    i.e. exp(-envelope*).  The input need not be convex."""
    if not envelope.finite_mask.any():
        raise PreconditionError("empty effective domain")
    primal = primal or envelope.grid.mirrored()
    return LogConcaveFunction(lft(envelope, primal).function)


def sup_convolution(f: LogConcaveFunction, g: LogConcaveFunction,
                    dual: Grid | None = None) -> LogConcaveFunction:
    """(f*g)(x) = sup_y f(y) g(x-y), computed as alexandrov(h_f + h_g)."""
    dual = dual or f.grid.mirrored()
    hf = support_function(f, dual)
    hg = support_function(g, dual)
    return alexandrov(hf.with_values(hf.values + hg.values), f.grid)


def scale(t: float, f: LogConcaveFunction) -> LogConcaveFunction:
    """Dilation (t.f)(x) = f(x/t)^t, i.e. potential t * pot(x/t).

    Points x/t that leave the box (only possible for t < 1 when the support
    touches the boundary) are treated as outside the support.
    """
    if t <= 0:
        raise PreconditionError("dilation factor must be > 0")
    if t == 1.0:
        return f
    grid = f.grid
    pts = grid.nodes().reshape(-1, grid.dim) / t
    inside = grid.contains(pts)
    vals = np.full(len(pts), np.inf)
    if inside.any():
        vals[inside] = np.asarray(evaluate(f.potential, pts[inside]), dtype=float)
    out = t * vals.reshape(grid.shape)
    return LogConcaveFunction(ExtendedGridFunction(grid, out))


def _pow_ext(v: np.ndarray, e: float) -> np.ndarray:
    # inf**e = inf for e > 0; tiny negatives from roundoff clamp to 0
    out = np.where(np.isinf(v), np.inf, np.power(np.clip(v, 0.0, None), e))
    return out


def lp_combination(f: LogConcaveFunction, g: LogConcaveFunction, t: float, p: float,
                   dual: Grid | None = None) -> LogConcaveFunction:
    """Lp combination: alexandrov((h_f^p + t h_g^p)^(1/p)) for p in (0, 1].

    Requires nonnegative support functions on the dual window; p = 1 is the
    sup-convolution with the dilated g, and t = 0 returns alexandrov(h_f).
    """
    if not 0 < p <= 1:
        raise PreconditionError("p must lie in (0, 1]")
    if t < 0:
        raise PreconditionError("t must be >= 0")
    dual = dual or f.grid.mirrored()
    hf = support_function(f, dual).values
    hg = support_function(g, dual).values
    tol = 1e-9 * max(1.0, float(np.max(np.abs(hf[np.isfinite(hf)]), initial=0.0)),
                     float(np.max(np.abs(hg[np.isfinite(hg)]), initial=0.0)))
    if np.min(hf) < -tol or np.min(hg) < -tol:
        raise PreconditionError("Lp combination needs h_f >= 0 and h_g >= 0 on the dual window")
    combined = _pow_ext(_pow_ext(hf, p) + t * _pow_ext(hg, p), 1.0 / p)
    return alexandrov(ExtendedGridFunction(dual, combined), f.grid)


def is_essentially_continuous(f: LogConcaveFunction, tol_rel: float = TOL_EC_REL) -> bool:
    """True when f vanishes (below tol) at every node of its support boundary.

    For potentials finite on the whole grid the box boundary plays the role
    of the support boundary.  Exact for the representable class: potentials
    that are +inf outside a node set.
    """
    if not f.support_mask.any():
        return True
    tol = tol_rel * f.max_value
    boundary = support_boundary_mask(f.potential)
    if not boundary.any():
        return True
    return bool(np.all(f.density[boundary] < tol))


def log_integral_functional(envelope: ExtendedGridFunction, primal: Grid | None = None) -> float:
    """The convex functional -log integral exp(-envelope*); equals
    -log integral(f) when the argument is the support function of f."""
    primal = primal or envelope.grid.mirrored()
    conj = lft(envelope, primal).function
    total = integrate_exp_neg(conj)
    if total <= 0.0:
        return np.inf
    return float(-np.log(total))


def convex_hull_of(pot: ExtendedGridFunction, dual: Grid | None = None) -> ExtendedGridFunction:
    """Alias for the biconjugate: the largest convex minorant representable
    through the dual window."""
    return biconjugate(pot, dual)
