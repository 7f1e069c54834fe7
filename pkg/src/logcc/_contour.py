"""Vectorized marching-squares contour lengths on node arrays.

Only total (optionally cell-weighted) segment length is needed, so no
polyline assembly happens: each boundary cell contributes its segment
lengths directly.  Binary data (indicator functions) gets one tent-smoothing
pass before contouring; the raw midpoint polygon of a binarized shape
overestimates lengths by up to ~8% at 22.5 degrees, while the smoothed field
restores first-order accuracy and perturbs already-smooth data only at
O(spacing^2).
"""

from __future__ import annotations

import numpy as np

# segment table: per inside-corner case the joined cell edges
# (0 = bottom, 1 = right, 2 = top, 3 = left); corners indexed
# 1:(0,0) 2:(1,0) 4:(1,1) 8:(0,1)
_MS_SEGMENTS = {
    0: [], 15: [],
    1: [(3, 0)], 14: [(3, 0)],
    2: [(0, 1)], 13: [(0, 1)],
    4: [(1, 2)], 11: [(1, 2)],
    8: [(2, 3)], 7: [(2, 3)],
    3: [(3, 1)], 12: [(3, 1)],
    6: [(0, 2)], 9: [(0, 2)],
    5: [(3, 2), (1, 0)],   # saddle, fixed convention
    10: [(3, 0), (1, 2)],
}


def tent_smooth(v: np.ndarray) -> np.ndarray:
    """One separable [1, 2, 1]/4 pass per axis; endpoints kept."""
    out = v.astype(float).copy()
    for axis in range(v.ndim):
        a = np.moveaxis(out, axis, 0)
        b = a.copy()
        b[1:-1] = 0.25 * a[:-2] + 0.5 * a[1:-1] + 0.25 * a[2:]
        out = np.moveaxis(b, 0, axis)
    return out


def contour_length(values: np.ndarray, axes, level: float,
                   cell_weights: np.ndarray | None = None) -> float:
    """Total marching-squares segment length of {values = level}.

    ``cell_weights`` (shape (n1-1, n2-1)) scales each cell's contribution,
    which turns the length into a weighted boundary integral.
    """
    v = values
    x, y = axes
    hx, hy = x[1] - x[0], y[1] - y[0]
    inside = v > level
    case = (inside[:-1, :-1].astype(np.int8)
            + 2 * inside[1:, :-1].astype(np.int8)
            + 4 * inside[1:, 1:].astype(np.int8)
            + 8 * inside[:-1, 1:].astype(np.int8))
    v00, v10, v11, v01 = v[:-1, :-1], v[1:, :-1], v[1:, 1:], v[:-1, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = (level - v00) / (v10 - v00)   # bottom edge, point (t, 0)
        t1 = (level - v10) / (v11 - v10)   # right edge,  point (1, t)
        t2 = (level - v01) / (v11 - v01)   # top edge,    point (t, 1)
        t3 = (level - v00) / (v01 - v00)   # left edge,   point (0, t)
    ex = np.stack([t0 * hx, np.full_like(t1, hx), t2 * hx, np.zeros_like(t3)])
    ey = np.stack([np.zeros_like(t0), t1 * hy, np.full_like(t2, hy), t3 * hy])
    total = 0.0
    for c, segs in _MS_SEGMENTS.items():
        if not segs:
            continue
        m = case == c
        if not m.any():
            continue
        w = cell_weights[m] if cell_weights is not None else 1.0
        for e1, e2 in segs:
            seg = np.hypot(ex[e1][m] - ex[e2][m], ey[e1][m] - ey[e2][m])
            total += float(np.sum(seg * w))
    return total


def weighted_boundary_measure(f) -> float:
    """Boundary trace of a log-concave function over its support boundary.

    1D: f summed over support-boundary nodes (counting measure).  2D: contour
    length of the tent-smoothed support indicator at level 1/2, each cell
    weighted by the largest f value among its support corners (the trace from
    inside), plus the box-edge trace when the support reaches the box.
    """
    from .grid import support_boundary_mask  # late import, avoids a cycle

    grid = f.grid
    dens = f.density
    if grid.dim == 1:
        return float(np.sum(dens[support_boundary_mask(f.potential)]))
    mask = f.support_mask
    total = 0.0
    if not mask.all():
        inside_vals = np.where(mask, dens, 0.0)
        corners = np.stack([
            inside_vals[:-1, :-1], inside_vals[1:, :-1],
            inside_vals[1:, 1:], inside_vals[:-1, 1:],
        ])
        cw = corners.max(axis=0)
        total += contour_length(tent_smooth(mask.astype(float)), grid.axes, 0.5, cw)
    # box-edge contribution where the support touches the boundary of the box
    h0, h1 = grid.spacing
    for sl, h in (((0, slice(None)), h1), ((-1, slice(None)), h1),
                  ((slice(None), 0), h0), ((slice(None), -1), h0)):
        line = np.where(mask[sl], dens[sl], 0.0)
        w = np.full(line.shape, h)
        w[0] = w[-1] = h / 2
        total += float(np.sum(line * w))
    return total
