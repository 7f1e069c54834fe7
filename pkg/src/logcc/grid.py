"""Regular grids and extended-real-valued functions on boxes in R^n, n in {1, 2}.

Function values live on the nodes of a uniform tensor grid.  +inf marks nodes
outside the effective domain; -inf and NaN are rejected.  All objects are
immutable after construction and every operation here is a pure function of
its inputs, so concurrent evaluation is safe.

Conventions for extended arithmetic: inf + c = inf, exp(-inf) = 0, and a
node with zero interpolation weight never contaminates a query with its inf.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._contour import contour_length, tent_smooth

# default tolerances, relative to the value scale of the data they test
TOL_CONVEX_REL = 1e-9
TOL_EC_REL = 1e-8


class PreconditionError(ValueError):
    """A documented precondition of an operation failed."""


class OutOfDomainError(PreconditionError):
    """A query point lies outside the grid box."""


class EmptyDomainError(PreconditionError):
    """A function has no finite value anywhere ("empty effective domain")."""


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on a box: per-axis closed interval and node count.

    ``bounds[k] = (lo, hi)`` with lo < hi and ``shape[k] >= 3`` nodes on axis
    k.  Node spacing is (hi - lo) / (shape[k] - 1).
    """

    bounds: tuple[tuple[float, float], ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "shape", shape)
        if len(bounds) not in (1, 2):
            raise PreconditionError(f"dimension must be 1 or 2, got {len(bounds)}")
        if len(shape) != len(bounds):
            raise PreconditionError("bounds and shape must have the same length")
        for (lo, hi), n in zip(bounds, shape):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise PreconditionError(f"bad axis interval [{lo}, {hi}]")
            if n < 3:
                raise PreconditionError(f"need at least 3 nodes per axis, got {n}")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.bounds, self.shape))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        out = []
        for (lo, hi), n in zip(self.bounds, self.shape):
            ax = np.linspace(lo, hi, n)
            if lo == -hi:
                # exactly antisymmetric nodes, so even samples mirror bit-for-bit
                ax = 0.5 * (ax - ax[::-1])
            ax.setflags(write=False)
            out.append(ax)
        return tuple(out)

    @property
    def is_even(self) -> bool:
        """True when every axis interval is symmetric about the origin."""
        return all(lo == -hi for lo, hi in self.bounds)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def mirrored(self) -> "Grid":
        """Grid reflected through the origin (identical for even grids)."""
        return Grid(tuple((-hi, -lo) for lo, hi in self.bounds), self.shape)

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (*grid.shape, dim)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid weights per node (tensor product in 2D)."""
        ws = []
        for ax, h in zip(self.axes, self.spacing):
            w = np.full(len(ax), h)
            w[0] = w[-1] = h / 2
            ws.append(w)
        if self.dim == 1:
            return ws[0]
        return np.multiply.outer(ws[0], ws[1])

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.ones(len(pts), dtype=bool)
        for k, (lo, hi) in enumerate(self.bounds):
            ok &= (pts[:, k] >= lo) & (pts[:, k] <= hi)
        return ok


@dataclass(frozen=True, eq=False)
class ExtendedGridFunction:
    """Node samples of a function R^n -> R u {+inf} on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise PreconditionError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if np.any(np.isnan(v)) or np.any(v == -np.inf):
            raise PreconditionError("values must be finite or +inf (no NaN, no -inf)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def value_scale(self) -> float:
        finite = self.values[self.finite_mask]
        if finite.size == 0:
            return 1.0
        return float(max(1.0, np.max(np.abs(finite))))

    def is_convex(self, tol: float | None = None) -> bool:
        """Discrete convexity certificate.

        Second differences along every axis line must be >= -tol at interior
        nodes whose stencil is finite, and the finite set along each axis
        line must be an interval (no interior +inf gaps).  Cached.
        """
        key = "_convex_cache"
        if tol is None and key in self.__dict__:
            return self.__dict__[key]
        t = TOL_CONVEX_REL * self.value_scale() if tol is None else tol
        ok = _axiswise_convexity(self.values, t)
        if tol is None:
            self.__dict__[key] = ok
        return ok

    def with_values(self, values: np.ndarray) -> "ExtendedGridFunction":
        return ExtendedGridFunction(self.grid, values)


def _axiswise_convexity(v: np.ndarray, tol: float) -> bool:
    for axis in range(v.ndim):
        a = np.moveaxis(v, axis, 0)
        fin = np.isfinite(a)
        # finite set per line must be contiguous
        starts = fin[1:] & ~fin[:-1]
        if np.any(starts.sum(axis=0) + fin[0].astype(int) > 1):
            return False
        trip = fin[:-2] & fin[1:-1] & fin[2:]
        if np.any(trip):
            second = a[:-2][trip] - 2.0 * a[1:-1][trip] + a[2:][trip]
            if np.any(second < -tol):
                return False
    return True


@dataclass(frozen=True, eq=False)
class LogConcaveFunction:
    """A log-concave function f = exp(-potential) with convex grid potential."""

    potential: ExtendedGridFunction

    @property
    def grid(self) -> Grid:
        return self.potential.grid

    @cached_property
    def density(self) -> np.ndarray:
        """Node values of f itself (exp(-inf) = 0)."""
        with np.errstate(under="ignore"):
            d = np.exp(-self.potential.values)
        d.setflags(write=False)
        return d

    @property
    def support_mask(self) -> np.ndarray:
        return self.potential.finite_mask

    @property
    def max_value(self) -> float:
        if not self.support_mask.any():
            return 0.0
        return float(np.exp(-np.min(self.potential.values[self.support_mask])))

    @cached_property
    def integral(self) -> float:
        return integrate_exp_neg(self.potential)

    @property
    def is_even(self) -> bool:
        """Exactly mirror-symmetric values on an origin-symmetric grid."""
        if not self.grid.is_even:
            return False
        v = self.potential.values
        return bool(np.array_equal(v, v[tuple(slice(None, None, -1) for _ in range(v.ndim))]))


# ---------------------------------------------------------------------------
# interpolation


def _locate(ax: np.ndarray, q: np.ndarray):
    """Cell index and fractional coordinate for queries q along axis ax.

    Fractions within 1e-12 of a node snap to it so that +inf neighbours with
    zero weight cannot contaminate an on-node query.
    """
    i = np.clip(np.searchsorted(ax, q, side="right") - 1, 0, len(ax) - 2)
    frac = (q - ax[i]) / (ax[i + 1] - ax[i])
    frac = np.where(frac < 1e-12, 0.0, np.where(frac > 1 - 1e-12, 1.0, frac))
    return i, frac


def _interp_1d(ax: np.ndarray, v: np.ndarray, q: np.ndarray) -> np.ndarray:
    i, frac = _locate(ax, q)
    lo, hi = v[i], v[i + 1]
    with np.errstate(invalid="ignore"):
        mid = (1.0 - frac) * lo + frac * hi
    return np.where(frac == 0.0, lo, np.where(frac == 1.0, hi, mid))


def evaluate(fun: ExtendedGridFunction, x) -> float | np.ndarray:
    """Multilinear interpolation of ``fun`` at point(s) ``x``.

    Returns +inf when any surrounding node that carries weight is +inf.
    Raises :class:`OutOfDomainError` for points outside the box.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[1] != fun.grid.dim:
        raise PreconditionError(f"points must have dim {fun.grid.dim}")
    inside = fun.grid.contains(pts)
    if not inside.all():
        bad = pts[~inside][0]
        raise OutOfDomainError(f"point {tuple(bad)} outside grid box {fun.grid.bounds}")
    v = fun.values
    if fun.grid.dim == 1:
        out = _interp_1d(fun.grid.axes[0], v, pts[:, 0])
    else:
        i0, f0 = _locate(fun.grid.axes[0], pts[:, 0])
        i1, f1 = _locate(fun.grid.axes[1], pts[:, 1])
        # bilinear with inf-safe collapse along each axis
        low = np.where(f1 == 0.0, v[i0, i1],
                       np.where(f1 == 1.0, v[i0, i1 + 1],
                                _inf_safe_mix(v[i0, i1], v[i0, i1 + 1], f1)))
        high = np.where(f1 == 0.0, v[i0 + 1, i1],
                        np.where(f1 == 1.0, v[i0 + 1, i1 + 1],
                                 _inf_safe_mix(v[i0 + 1, i1], v[i0 + 1, i1 + 1], f1)))
        out = np.where(f0 == 0.0, low,
                       np.where(f0 == 1.0, high, _inf_safe_mix(low, high, f0)))
    scalar = np.asarray(x, dtype=float).ndim <= 1
    return float(out[0]) if scalar else out


def _inf_safe_mix(a, b, frac):
    with np.errstate(invalid="ignore"):
        mixed = (1.0 - frac) * a + frac * b
    return np.where(np.isinf(a) | np.isinf(b), np.inf, mixed)


# ---------------------------------------------------------------------------
# quadrature


def integrate_exp_neg(pot: ExtendedGridFunction) -> float:
    """Trapezoid quadrature of exp(-pot) over the grid box (exp(-inf) = 0)."""
    with np.errstate(under="ignore"):
        f = np.exp(-pot.values)
    return float(np.sum(f * pot.grid.quadrature_weights()))


def truncation_tail_bound(pot: ExtendedGridFunction) -> float:
    """Heuristic bound exp(-min boundary value) * (box surface measure).

    Quantifies how much of exp(-pot) may have been cut off by the box; zero
    when the potential is +inf on the whole box boundary.
    """
    v = pot.values
    if pot.grid.dim == 1:
        boundary = np.array([v[0], v[-1]])
        surface = 2.0
    else:
        boundary = np.concatenate([v[0, :], v[-1, :], v[:, 0], v[:, -1]])
        (lo0, hi0), (lo1, hi1) = pot.grid.bounds
        surface = 2.0 * ((hi0 - lo0) + (hi1 - lo1))
    m = np.min(boundary)
    with np.errstate(under="ignore"):
        return float(np.exp(-m) * surface)


# ---------------------------------------------------------------------------
# gradients


@dataclass(frozen=True, eq=False)
class GradientField:
    """Finite-difference gradient of a potential on its support.

    ``mask`` flags nodes where a gradient is defined on every axis;
    ``vectors`` has shape (*grid.shape, dim) and is NaN off the mask.
    """

    grid: Grid
    mask: np.ndarray
    vectors: np.ndarray

    def defined_nodes(self) -> np.ndarray:
        """Coordinates of nodes with a defined gradient, shape (m, dim)."""
        return self.grid.nodes()[self.mask]

    def defined_vectors(self) -> np.ndarray:
        return self.vectors[self.mask]


def gradient_map(pot: ExtendedGridFunction) -> GradientField:
    """Central differences on the support interior, one-sided at support
    edges and next to +inf nodes.  Nodes with no finite axis neighbour get
    no gradient (excluded from the mask)."""
    if not pot.finite_mask.any():
        raise PreconditionError("potential is +inf everywhere")
    v = pot.values
    g = pot.grid
    vecs = np.full(v.shape + (g.dim,), np.nan)
    mask = pot.finite_mask.copy()
    for axis in range(g.dim):
        h = g.spacing[axis]
        a = np.moveaxis(v, axis, 0)
        fin = np.isfinite(a)
        n = a.shape[0]
        comp = np.full(a.shape, np.nan)
        has_prev = np.zeros(a.shape, dtype=bool)
        has_next = np.zeros(a.shape, dtype=bool)
        has_prev[1:] = fin[:-1]
        has_next[:-1] = fin[1:]
        prev = np.roll(a, 1, axis=0)
        nxt = np.roll(a, -1, axis=0)
        with np.errstate(invalid="ignore"):
            central = (nxt - prev) / (2 * h)
            fwd = (nxt - a) / h
            bwd = (a - prev) / h
        use_c = fin & has_prev & has_next
        use_f = fin & ~has_prev & has_next
        use_b = fin & has_prev & ~has_next
        comp[use_c] = central[use_c]
        comp[use_f] = fwd[use_f]
        comp[use_b] = bwd[use_b]
        defined = use_c | use_f | use_b
        np.moveaxis(vecs[..., axis], axis, 0)[...] = comp
        mask &= np.moveaxis(defined, 0, axis)
    vecs[~mask] = np.nan
    return GradientField(g, mask, vecs)


# ---------------------------------------------------------------------------
# level-set geometry


def superlevel_perimeter(f: LogConcaveFunction, t: float) -> float:
    """Perimeter of the strict super-level set {f > t}.

    1D: number of sign changes of f - t along the line.  2D: marching-squares
    contour length after one tent-smoothing pass (the smoothing removes the
    staircase bias that raw binary data, e.g. indicators, would otherwise
    produce; smooth data is perturbed only at O(spacing^2)).
    """
    if t <= 0:
        raise PreconditionError("level t must be > 0")
    d = f.density
    if f.grid.dim == 1:
        inside = d > t
        return float(np.count_nonzero(inside[1:] != inside[:-1]))
    return contour_length(tent_smooth(d), f.grid.axes, t)


def support_boundary_mask(pot: ExtendedGridFunction) -> np.ndarray:
    """Finite nodes adjacent to a +inf node, or finite nodes on the box edge."""
    fin = pot.finite_mask
    v = pot.values
    near_inf = np.zeros_like(fin)
    for axis in range(v.ndim):
        a = np.isinf(np.moveaxis(v, axis, 0))
        adj = np.zeros_like(a)
        adj[:-1] |= a[1:]
        adj[1:] |= a[:-1]
        near_inf |= np.moveaxis(adj, 0, axis)
    edge = np.zeros_like(fin)
    for axis in range(v.ndim):
        e = np.moveaxis(edge, axis, 0)
        e[0] = True
        e[-1] = True
    return fin & (near_inf | edge)
