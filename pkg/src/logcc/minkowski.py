"""Variational solver for the even Lp Minkowski problem on log-concave
functions: given an even measure mu and p in (0, 1], find f with
Lp surface-area measure proportional to mu.

The solver minimizes integral(psi^p dmu) over even nonnegative psi subject
to integral(exp(-psi*)) >= a.  Iterates take a preconditioned subgradient
step and are then projected by the proof devices themselves: even
symmetrization, convexification by biconjugation (which leaves the
constraint integral unchanged), clamping at zero, and a normalization shift
that restores the constraint exactly.  The Karush-Kuhn-Tucker residual is
the binned L1 distance between mu and c * S_{f,p} with c fitted by mass.

In one dimension the minimizer has a closed form obtained by transporting
the measure: with nu the half-line part of mu, the profile
    w(y) = integral_y^inf s dnu(s)
is the value of f along the transport ray, and integrating dnu / w yields
the inverse gradient map.  The solver starts from this inversion (iterated
with h^(p-1) reweighting when p < 1), so the subgradient loop usually only
certifies optimality.  psi is pinned to +inf outside the convex hull of the
atoms; restricting there never loses feasibility or objective, and the true
minimizer lives on that hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (
    ExtendedGridFunction,
    Grid,
    LogConcaveFunction,
    PreconditionError,
    evaluate,
    integrate_exp_neg,
)
from .legendre import biconjugate, lft
from .measures import (
    DiscreteMeasure,
    integrate_against,
    measure_distance,
    surface_area_measure,
)

__all__ = [
    "SolverConfig",
    "SolverResult",
    "solve_lp_minkowski",
    "objective",
    "constraint_gradient_check",
    "ma_residual",
    "ma_residual_field",
    "MaResidualReport",
]


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`solve_lp_minkowski`.

    ``a`` is the constraint level for integral(f); ``None`` selects
    max(e, total mass of the measure), and the solver doubles it and restarts
    if the minimizer degenerates (psi(0) at zero).  ``grad_tol`` is the KKT
    residual threshold relative to the measure's mass, evaluated on
    ``kkt_bins``.  The default bins are about 32 grid spacings wide: the
    gradient of a grid potential is quantized at the spacing scale, so
    histograms finer than that mostly measure lattice beat rather than
    mismatch, and the default tolerance sits just above that floor.
    """

    p: float
    grid: Grid
    a: float | None = None
    step: float = 1.0
    max_iters: int = 400
    grad_tol: float = 0.03
    feas_tol: float = 1e-6
    max_escalations: int = 4
    kkt_bins: Grid | None = None

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise PreconditionError("p must lie in (0, 1]")
        if not self.grid.is_even:
            raise PreconditionError("solver grid must be symmetric about the origin")
        if self.a is not None and self.a <= 0:
            raise PreconditionError("constraint level a must be > 0")

    def resolved_kkt_bins(self) -> Grid:
        if self.kkt_bins is not None:
            return self.kkt_bins
        shape = tuple(max(17, (n - 1) // 32 + 1) for n in self.grid.shape)
        return Grid(self.grid.bounds, shape)


@dataclass(frozen=True, eq=False)
class SolverResult:
    """Solution pair and diagnostics.

    ``psi`` is the even convex support-function iterate (>= 0 up to
    tolerance, +inf outside the atom hull) and ``f = exp(-psi*)``.  For p = 1
    the pair is rescaled so that the recovered measure matches mu itself
    (c = 1); ``constraint_level`` records integral(f) after that rescaling,
    while the per-iterate ``feasibility_trace`` is measured against the
    configured level.
    """

    psi: ExtendedGridFunction
    f: LogConcaveFunction
    c: float
    objective_trace: np.ndarray
    measure_mismatch: float
    status: str
    residual_trace: np.ndarray
    feasibility_trace: np.ndarray
    constraint_level: float
    iterations: int


# ---------------------------------------------------------------------------
# helpers


def _interp_scatter(grid: Grid, points: np.ndarray, amounts: np.ndarray) -> np.ndarray:
    """Adjoint of multilinear interpolation: spread atom amounts onto nodes."""
    out = np.zeros(grid.shape)
    if grid.dim == 1:
        ax = grid.axes[0]
        i = np.clip(np.searchsorted(ax, points[:, 0], side="right") - 1, 0, len(ax) - 2)
        frac = np.clip((points[:, 0] - ax[i]) / (ax[i + 1] - ax[i]), 0.0, 1.0)
        np.add.at(out, i, amounts * (1.0 - frac))
        np.add.at(out, i + 1, amounts * frac)
        return out
    ax0, ax1 = grid.axes
    i0 = np.clip(np.searchsorted(ax0, points[:, 0], side="right") - 1, 0, len(ax0) - 2)
    i1 = np.clip(np.searchsorted(ax1, points[:, 1], side="right") - 1, 0, len(ax1) - 2)
    f0 = np.clip((points[:, 0] - ax0[i0]) / (ax0[i0 + 1] - ax0[i0]), 0.0, 1.0)
    f1 = np.clip((points[:, 1] - ax1[i1]) / (ax1[i1 + 1] - ax1[i1]), 0.0, 1.0)
    np.add.at(out, (i0, i1), amounts * (1 - f0) * (1 - f1))
    np.add.at(out, (i0 + 1, i1), amounts * f0 * (1 - f1))
    np.add.at(out, (i0, i1 + 1), amounts * (1 - f0) * f1)
    np.add.at(out, (i0 + 1, i1 + 1), amounts * f0 * f1)
    return out


def _mirror(values: np.ndarray) -> np.ndarray:
    return values[tuple(slice(None, None, -1) for _ in range(values.ndim))]


def _atom_hull_mask(grid: Grid, measure: DiscreteMeasure) -> np.ndarray:
    """Nodes inside the bounding box of the atoms, closed under the
    interpolation stencil of every atom, mirrored for evenness."""
    mask = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        ax = grid.axes[axis]
        lo = measure.points[:, axis].min()
        hi = measure.points[:, axis].max()
        line = (ax >= lo - 1e-12) & (ax <= hi + 1e-12)
        shape = [1] * grid.dim
        shape[axis] = len(ax)
        mask &= line.reshape(shape)
    stencil = _interp_scatter(grid, measure.points, np.ones(len(measure.points)))
    mask |= stencil > 0
    return mask | _mirror(mask)


def _second_moment_check(measure: DiscreteMeasure):
    pts, w = measure.points, measure.weights
    m = (pts[:, :, None] * pts[:, None, :] * w[:, None, None]).sum(axis=0) / w.sum()
    eig = np.linalg.eigvalsh(m)
    if eig[0] <= 1e-10 * max(np.trace(m), np.finfo(float).tiny):
        raise PreconditionError("measure is supported on a hyperplane")


def objective(psi: ExtendedGridFunction, measure: DiscreteMeasure, p: float) -> float:
    """integral(psi^p dmu) by interpolated evaluation; +inf when psi is +inf
    at an atom, error when psi is negative there beyond tolerance."""
    if not 0 < p <= 1:
        raise PreconditionError("p must lie in (0, 1]")
    vals = np.asarray(evaluate(psi, measure.points), dtype=float)
    tol = 1e-9 * psi.value_scale()
    if np.any(vals < -tol):
        raise PreconditionError("objective needs psi >= 0 at the measure's atoms")
    if np.any(np.isinf(vals)):
        return float(np.inf)
    return float(np.sum(np.clip(vals, 0.0, None) ** p * measure.weights))


# ---------------------------------------------------------------------------
# closed-form 1D initialization


def _transport_inversion_1d(measure: DiscreteMeasure, primal: Grid,
                            with_h: bool = False):
    """Potential on the primal grid whose surface-area measure matches the
    even 1D measure (up to quadrature), built segment by segment.

    With ``with_h`` also returns the conjugate evaluated at the positive atom
    slopes (exact Fenchel values along the transport segments) as a callable
    on |y|, for level-aware reweighting without grid interpolation error.
    """
    pts = measure.points[:, 0]
    w = measure.weights
    pos = pts > 1e-14
    ys, ws = pts[pos], w[pos]
    order = np.argsort(ys)
    ys, ws = ys[order], ws[order]
    uy, inv = np.unique(ys, return_inverse=True)
    uw = np.zeros_like(uy)
    np.add.at(uw, inv, ws)
    ys, ws = uy, uw
    if ys.size == 0:
        raise PreconditionError("measure has no mass off the origin")
    w0 = float(np.sum(ys * ws))
    mass0 = float(w[np.abs(pts) <= 1e-14].sum()) / 2.0
    xb = [0.0]
    vb = [-math.log(w0)]
    wcur = w0
    xmax = primal.bounds[0][1]
    if mass0 > 0:
        xb.append(xb[-1] + mass0 / wcur)
        vb.append(vb[-1])
    h_at = np.empty_like(ys)
    for k, (y, wi) in enumerate(zip(ys, ws)):
        # conjugate value at slope y: Fenchel equality on the segment start
        h_at[k] = xb[-1] * y - vb[-1]
        q = 1.0 - y * wi / wcur
        if q <= 1e-300:
            # the remaining profile decays with slope y out to the box edge
            length = max(xmax - xb[-1], 0.0)
            xb.append(xb[-1] + length)
            vb.append(vb[-1] + y * length)
            wcur = 0.0
            h_at[k + 1:] = xb[-1] * ys[k + 1:] - vb[-1]
            break
        length = -math.log(q) / y
        xb.append(xb[-1] + length)
        vb.append(vb[-1] + y * length)
        wcur *= q
    xb, vb = np.array(xb), np.array(vb)
    ax = np.abs(primal.axes[0])
    pot = np.interp(ax, xb, vb, right=np.inf)
    if wcur > 1e-300:
        beyond = ax > xb[-1]
        pot[beyond] = vb[-1] + ys[-1] * (ax[beyond] - xb[-1])
    if not with_h:
        return pot

    def h_fun(yq: np.ndarray) -> np.ndarray:
        q = np.abs(np.asarray(yq, dtype=float))
        # exact conjugate: piecewise-linear in y, vertices at the segment slopes
        out = np.interp(q, ys, h_at)
        below = q < ys[0]
        out[below] = -vb[0]
        above = q > ys[-1]
        out[above] = xb[-1] * q[above] - vb[-1]
        return out

    return pot, h_fun


def _initial_potential(measure: DiscreteMeasure, config: SolverConfig,
                       primal: Grid, a: float) -> np.ndarray | None:
    """Best-effort potential guess on the primal grid, or None for the cone."""
    if primal.dim == 1:
        pts = measure.points.copy()
        w = measure.weights.copy()
        if config.p < 1:
            # reweighting fixed point: nu = mu * h^(p-1) contracts to the
            # profile whose Lp measure is proportional to mu; h comes from
            # the transport segments themselves (exact Fenchel values) and is
            # taken at the constraint level so the fixed point matches mu
            # at that level exactly
            h_at = np.ones(len(pts))
            pot = None
            shift = 0.0
            for _ in range(120):
                nu = DiscreteMeasure(pts, w * h_at ** (config.p - 1.0), even=True)
                pot, h_fun = _transport_inversion_1d(nu, primal, with_h=True)
                total = integrate_exp_neg(ExtendedGridFunction(primal, pot))
                shift = math.log(a) - math.log(total)
                new_h = np.clip(h_fun(pts[:, 0]) + shift, 1e-9, None)
                if np.max(np.abs(new_h - h_at)) <= 1e-12 * max(1.0, float(np.max(h_at))):
                    break
                h_at = new_h
            return pot - shift
        return _transport_inversion_1d(measure, primal)
    # 2D: density warm start when the binned measure has no interior holes
    binned = _interp_scatter(primal, measure.points, measure.weights)
    hull = _atom_hull_mask(primal, measure)
    if np.all(binned[hull] > 0):
        dens = binned / primal.cell_volume
        with np.errstate(divide="ignore"):
            pot = -np.log(a * dens / measure.total_mass)
        pot[~hull] = np.inf
        return pot
    return None


# ---------------------------------------------------------------------------
# the solver


class _Iterate:
    """Mutable (psi, conjugate) pair kept feasible on a fixed domain mask."""

    def __init__(self, grid: Grid, primal: Grid, dom: np.ndarray, a: float):
        self.grid = grid
        self.primal = primal
        self.dom = dom
        self.a = a
        self.psi = None          # ndarray on grid, +inf outside dom
        self.phi = None          # ndarray on primal
        self.integral = None

    def set(self, psi_values: np.ndarray):
        psi = np.where(self.dom, psi_values, np.inf)
        conj = lft(ExtendedGridFunction(self.grid, psi), self.primal).function
        total = integrate_exp_neg(conj)
        if not np.isfinite(total) or total <= 0:
            raise PreconditionError("degenerate iterate: conjugate integral is 0 or inf")
        shift = math.log(self.a) - math.log(total)
        psi = np.where(self.dom, psi + shift, np.inf)
        self.psi = psi
        self.phi = conj.values - shift
        self.integral = self.a  # exact by the shift rule
        return self

    def project(self, raw: np.ndarray):
        """Symmetrize, convexify by biconjugation, clamp at 0, re-shift."""
        sym = 0.5 * (raw + _mirror(raw))
        sym = np.where(self.dom, sym, np.inf)
        env = biconjugate(ExtendedGridFunction(self.grid, sym), self.primal).values
        env = np.where(self.dom, np.maximum(env, 0.0), np.inf)
        return self.set(env)

    def psi_function(self) -> ExtendedGridFunction:
        return ExtendedGridFunction(self.grid, self.psi)

    def f_function(self) -> LogConcaveFunction:
        return LogConcaveFunction(ExtendedGridFunction(self.primal, self.phi))

    def measured_feasibility(self) -> float:
        return abs(integrate_exp_neg(ExtendedGridFunction(self.primal, self.phi))
                   - self.a) / self.a


def _sfp_measure(it: _Iterate, p: float) -> DiscreteMeasure:
    f = it.f_function()
    sf = surface_area_measure(f)
    if p == 1.0:
        return sf
    hv = np.clip(np.asarray(evaluate(it.psi_function(), sf.points), dtype=float), 0.0, None)
    w = sf.weights * hv ** (1.0 - p)
    keep = w > 0
    return DiscreteMeasure(sf.points[keep], w[keep], even=sf.even)


def solve_lp_minkowski(measure: DiscreteMeasure, config: SolverConfig) -> SolverResult:
    """Solve S_{f,p} = c * mu for an even measure mu.

    Raises :class:`PreconditionError` for non-even or hyperplane-supported
    measures.  Status is "converged" when the KKT residual drops below
    ``grad_tol`` (relative to the measure's mass), otherwise "max_iters" or
    "stalled" with the trace retained.
    """
    if measure.dim != config.grid.dim:
        raise PreconditionError("measure dimension must match the grid")
    defect = measure.pairing_defect()
    if not defect <= 1e-9 * float(np.max(measure.weights)):
        raise PreconditionError("solver requires an even measure (atom pairing failed)")
    _second_moment_check(measure)
    if not config.grid.contains(measure.points).all():
        raise PreconditionError("all atoms must lie inside the solver grid")

    a = config.a if config.a is not None else max(math.e, measure.total_mass)
    for escalation in range(config.max_escalations + 1):
        result = _solve_at_level(measure, config, a)
        psi0 = float(evaluate(result.psi, np.zeros(config.grid.dim)))
        if psi0 > 1e-8 * max(1.0, math.log(max(a, math.e))):
            return result
        a *= 2.0
    return result


def _solve_at_level(measure: DiscreteMeasure, config: SolverConfig, a: float) -> SolverResult:
    grid = config.grid
    primal = grid.mirrored()
    p = config.p
    dom = _atom_hull_mask(grid, measure)
    mass = measure.total_mass

    kkt_bins = config.resolved_kkt_bins()
    it = _Iterate(grid, primal, dom, a)
    init = _initial_potential(measure, config, primal, a)
    if init is not None:
        seed = lft(ExtendedGridFunction(primal, init), grid).function.values
    else:
        # cone witness: log(a) + c_n |y| with |c_n B^n| = 1 is always feasible
        cn = 0.5 if grid.dim == 1 else 1.0 / math.sqrt(math.pi)
        radii = np.linalg.norm(grid.nodes(), axis=-1)
        seed = math.log(max(a, math.e)) + cn * radii
    it.project(np.where(dom, seed, np.inf))

    mub = _interp_scatter(grid, measure.points, measure.weights)
    precond = np.maximum(mub, 1e-3 * mub.max())

    obj = objective(it.psi_function(), measure, p)
    eta = config.step
    obj_trace = [obj]
    feas_trace = [it.measured_feasibility()]
    res_trace = []
    status = "max_iters"
    iters = 0
    for iters in range(config.max_iters + 1):
        sfp = _sfp_measure(it, p)
        c = mass / sfp.total_mass
        res = measure_distance(measure, sfp.scaled(c), kkt_bins).l1 / mass
        res_trace.append(res)
        if res < config.grad_tol:
            status = "converged"
            break
        if iters == config.max_iters:
            break

        # subgradient of the shift-reduced objective: a step against the
        # atom term p psi^(p-1) dmu plus the constraint response -S_f / a
        vals = np.clip(np.asarray(evaluate(it.psi_function(), measure.points),
                                  dtype=float), 1e-12, None)
        atom_amount = p * vals ** (p - 1.0) * measure.weights
        gobj = _interp_scatter(grid, measure.points, atom_amount)
        sf = surface_area_measure(it.f_function())
        sbin = _interp_scatter(grid, sf.points, sf.weights)
        lam = float(np.sum(atom_amount))
        g = np.where(dom, (gobj - (lam / a) * sbin) / precond, 0.0)
        g = 0.5 * (g + _mirror(g))

        accepted = False
        for _ in range(30):
            cand = _Iterate(grid, primal, dom, a)
            cand.project(np.where(dom, it.psi - eta * g, np.inf))
            cand_obj = objective(cand.psi_function(), measure, p)
            if cand_obj <= obj + 1e-9 * max(1.0, abs(obj)):
                it, obj = cand, cand_obj
                eta = min(eta * 1.5, 1e4)
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            status = "stalled"
            break
        obj_trace.append(obj)
        feas_trace.append(it.measured_feasibility())

    # final pair; for p = 1 rescale so the recovered measure is mu itself
    psi_vals = it.psi
    phi_vals = it.phi
    constraint_level = a
    if p == 1.0:
        sf = surface_area_measure(it.f_function())
        c = mass / sf.total_mass
        psi_vals = np.where(dom, psi_vals + math.log(c), np.inf)
        phi_vals = phi_vals - math.log(c)
        constraint_level = a * c
    psi_fun = ExtendedGridFunction(grid, psi_vals)
    f_fun = LogConcaveFunction(ExtendedGridFunction(primal, phi_vals))
    sfp_final = _final_sfp(psi_fun, f_fun, p)
    c_final = mass / sfp_final.total_mass
    mismatch = measure_distance(measure, sfp_final.scaled(c_final), kkt_bins).l1 / mass
    return SolverResult(
        psi=psi_fun, f=f_fun, c=c_final,
        objective_trace=np.asarray(obj_trace),
        measure_mismatch=mismatch,
        status=status,
        residual_trace=np.asarray(res_trace),
        feasibility_trace=np.asarray(feas_trace),
        constraint_level=constraint_level,
        iterations=iters,
    )


def _final_sfp(psi: ExtendedGridFunction, f: LogConcaveFunction, p: float) -> DiscreteMeasure:
    sf = surface_area_measure(f)
    if p == 1.0:
        return sf
    hv = np.clip(np.asarray(evaluate(psi, sf.points), dtype=float), 0.0, None)
    w = sf.weights * hv ** (1.0 - p)
    keep = w > 0
    return DiscreteMeasure(sf.points[keep], w[keep], even=sf.even)


# ---------------------------------------------------------------------------
# first-variation check of the constraint and Monge-Ampere diagnostics


@dataclass(frozen=True)
class ConstraintGradientReport:
    estimate: float
    predicted: float
    relative_gap: float


def constraint_gradient_check(psi: ExtendedGridFunction, v: ExtendedGridFunction,
                              schedule=None, primal: Grid | None = None) -> ConstraintGradientReport:
    """Two-sided finite differences of t -> integral exp(-(psi + t v)*)
    against the prediction integral(v dS_f), f = exp(-psi*).

    ``v`` must be bounded and supported where psi is finite.
    """
    if psi.grid != v.grid:
        raise PreconditionError("psi and v must share a grid")
    if not np.isfinite(v.values).all():
        raise PreconditionError("test direction must be bounded")
    if np.any((v.values != 0.0) & ~psi.finite_mask):
        raise PreconditionError("test direction must vanish where psi is +inf")
    primal = primal or psi.grid.mirrored()
    t = np.asarray(0.5 ** np.arange(3, 11)) if schedule is None else np.asarray(schedule, float)

    def total(tk: float) -> float:
        shifted = psi.with_values(psi.values + tk * v.values)
        return integrate_exp_neg(lft(shifted, primal).function)

    two_sided = np.array([(total(tk) - total(-tk)) / (2 * tk) for tk in t])
    if len(t) >= 2:
        r = t[-2] / t[-1]
        est = float((r * two_sided[-1] - two_sided[-2]) / (r - 1.0))
    else:
        est = float(two_sided[-1])
    f = LogConcaveFunction(lft(psi, primal).function)
    predicted = integrate_against(v, surface_area_measure(f))
    gap = abs(est - predicted) / max(abs(predicted), 1e-8)
    return ConstraintGradientReport(est, predicted, gap)


@dataclass(frozen=True, eq=False)
class MaResidualReport:
    field: np.ndarray          # residual per node, NaN where excluded
    l1_relative: float
    nodes_used: int
    nodes_excluded: int


def ma_residual_field(f: LogConcaveFunction, density, p: float,
                      c: float = 1.0,
                      support_fn: ExtendedGridFunction | None = None) -> MaResidualReport:
    """Node-wise residual of c * density(grad) * det(hess) = h^(1-p) exp(-pot)
    over interior support nodes with a full finite-difference stencil.

    ``density`` is a callable (see :func:`logcc.measures.binned_density`).
    For p < 1 a support function must be supplied for the h^(1-p) factor,
    evaluated at the gradient.  Diagnostic only: generalized solutions need
    not be twice differentiable, so large residuals flag non-smoothness
    rather than wrongness.
    """
    grid = f.grid
    v = f.potential.values
    fin = f.support_mask
    det, grad, interior = _hessian_det(v, grid, fin)
    with np.errstate(under="ignore"):
        rhs = np.exp(-v)
    if p < 1.0:
        if support_fn is None:
            raise PreconditionError("p < 1 needs the support function for the h^(1-p) factor")
        hval = np.full(grid.shape, np.nan)
        pts = grad[interior]
        hv = np.clip(np.asarray(evaluate(support_fn, pts), dtype=float), 0.0, None)
        hval[interior] = hv
        rhs = np.power(hval, 1.0 - p) * rhs
    dens = np.full(grid.shape, np.nan)
    pts = grad[interior]
    dens[interior] = np.asarray(density(pts if grid.dim > 1 else pts[:, 0]), dtype=float)
    resid = np.full(grid.shape, np.nan)
    resid[interior] = (c * dens[interior] * det[interior]) - rhs[interior]
    bad = ~np.isfinite(resid) & interior
    used = interior & np.isfinite(resid)
    denom = float(np.sum(np.abs(rhs[used])))
    l1 = float(np.sum(np.abs(resid[used])) / denom) if denom > 0 else np.inf
    out = np.where(used, resid, np.nan)
    return MaResidualReport(out, l1, int(used.sum()), int(bad.sum() + (~interior).sum()))


def ma_residual(result: SolverResult, density, p: float) -> MaResidualReport:
    """Monge-Ampere residual of a solver result against a measure density."""
    return ma_residual_field(result.f, density, p, c=result.c, support_fn=result.psi)


def _hessian_det(v: np.ndarray, grid: Grid, fin: np.ndarray):
    """Central-difference gradient, Hessian determinant, and the interior
    mask (full stencil finite, off the box edge)."""
    dim = grid.dim
    interior = fin.copy()
    for axis in range(dim):
        a = np.moveaxis(interior, axis, 0)
        a[0] = False
        a[-1] = False
    for axis in range(dim):
        shifted_fwd = np.roll(fin, -1, axis=axis)
        shifted_bwd = np.roll(fin, 1, axis=axis)
        interior &= shifted_fwd & shifted_bwd
    grad = np.full(v.shape + (dim,), np.nan)
    second = []
    for axis in range(dim):
        h = grid.spacing[axis]
        a = np.moveaxis(v, axis, 0)
        d1 = np.full(a.shape, np.nan)
        d2 = np.full(a.shape, np.nan)
        with np.errstate(invalid="ignore"):
            d1[1:-1] = (a[2:] - a[:-2]) / (2 * h)
            d2[1:-1] = (a[2:] - 2 * a[1:-1] + a[:-2]) / (h * h)
        np.moveaxis(grad[..., axis], axis, 0)[...] = d1
        second.append(np.moveaxis(d2, 0, axis))
    if dim == 1:
        det = second[0]
    else:
        h0, h1 = grid.spacing
        mixed = np.full(v.shape, np.nan)
        with np.errstate(invalid="ignore"):
            mixed[1:-1, 1:-1] = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4 * h0 * h1)
        # corners of the mixed stencil must be finite too
        diag_ok = (np.roll(np.roll(fin, -1, 0), -1, 1) & np.roll(np.roll(fin, -1, 0), 1, 1)
                   & np.roll(np.roll(fin, 1, 0), -1, 1) & np.roll(np.roll(fin, 1, 0), 1, 1))
        interior &= diag_ok
        det = second[0] * second[1] - mixed * mixed
    return det, grad, interior
