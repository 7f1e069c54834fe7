"""Independent oracles the tests check the library against.

The transforms here are deliberately naive (full O(N*M) maxima with
first-index argmax), the integrals use scipy quadrature, and the geometric
constants are analytic.  Nothing in this module calls back into the fast
code paths it is used to verify.
"""

import numpy as np
from scipy import integrate

SQRT_2PI = 2.5066282746310002  # sqrt(2*pi)


def brute_lft_1d(x, values, y):
    """Direct conjugate max_i (x_i*y_j - v_i) over finite samples."""
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    assert finite.any()
    mat = x[:, None] * y[None, :] - v[:, None]
    mat[~finite, :] = -np.inf
    return mat.max(axis=0), mat.argmax(axis=0)


def brute_lft_2d(x1, x2, values, y1, y2):
    """Direct 2D conjugate with the same evaluation expression the fast
    transform uses: (x1*y1 + x2*y2) - v, first-flat-index argmax."""
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    assert finite.any()
    out = np.empty((len(y1), len(y2)))
    arg = np.empty((len(y1), len(y2), 2), dtype=np.intp)
    X1 = x1[:, None]
    X2 = x2[None, :]
    for j1, a in enumerate(y1):
        for j2, b in enumerate(y2):
            mat = X1 * a + X2 * b - v
            mat = np.where(finite, mat, -np.inf)
            flat = mat.argmax()
            i1, i2 = np.unravel_index(flat, v.shape)
            out[j1, j2] = mat[i1, i2]
            arg[j1, j2] = (i1, i2)
    return out, arg


def direct_sup_convolution(xs, f_vals, g_vals):
    """(f*g)(x_i) = max_j f(x_j) g(x_i - x_j) with linear interpolation of g
    and zero extension outside the box.  O(N^2)."""
    n = len(xs)
    out = np.zeros(n)
    for i in range(n):
        shifted = xs[i] - xs
        gv = np.interp(shifted, xs, g_vals, left=0.0, right=0.0)
        out[i] = np.max(f_vals * gv)
    return out


def gauss_integral(sigma2=1.0):
    return float(np.sqrt(2 * np.pi * sigma2))


def quad(fn, lo, hi):
    val, _ = integrate.quad(fn, lo, hi, limit=200)
    return val


def random_convex_values(rng, x, scale=3.0):
    """Random convex samples: cumulative sums of increasing slopes."""
    slopes = np.sort(rng.uniform(-scale, scale, len(x) - 1))
    v = np.concatenate([[0.0], np.cumsum(slopes * np.diff(x))])
    return v - v.min() + rng.uniform(-1, 1)


def dyadic_grid_values(rng, n, lo=-8.0, hi=8.0, convex=True):
    """Instance whose nodes, values, and products are exactly representable:
    bounds are powers of two, node counts 2^k + 1, values multiples of 2^-10.
    All arithmetic in the transform is then exact, so 'exact' assertions are
    meaningful rather than lucky."""
    assert (n - 1) & (n - 2) == 0, "need 2^k + 1 nodes"
    x = np.linspace(lo, hi, n)
    if convex:
        steps = rng.integers(0, 64, n - 1)
        slopes = np.cumsum(steps) - np.sum(steps) // 2
        vals = np.concatenate([[0], np.cumsum(slopes)]) * (hi - lo) / (n - 1)
        vals = vals / 16.0
    else:
        vals = rng.integers(-2 ** 12, 2 ** 12, n).astype(float)
    vals = np.round(vals * 1024) / 1024.0
    return x, vals
