import numpy as np
import pytest

from logcc import (
    EmptyDomainError,
    ExtendedGridFunction,
    Grid,
    PreconditionError,
    argmax_consistency_check,
    biconjugate,
    lft,
    lft_1d,
)

from oracles import brute_lft_1d, brute_lft_2d, dyadic_grid_values


def line(lo, hi, n):
    return Grid(((float(lo), float(hi)),), (int(n),))


def square(half, n):
    return Grid(((-half, half), (-half, half)), (n, n))


def fun(grid, values):
    return ExtendedGridFunction(grid, values)


class TestLft1d:
    def test_quadratic(self):
        g = line(-8, 8, 1001)
        dual = line(-4, 4, 801)
        res = lft_1d(fun(g, g.axes[0] ** 2 / 2), dual)
        j = np.argmin(np.abs(dual.axes[0] - 1.0))
        brute, _ = brute_lft_1d(g.axes[0], g.axes[0] ** 2 / 2, dual.axes[0])
        assert res.function.values[j] == brute[j]
        assert res.function.values[j] == pytest.approx(0.5, abs=1e-4)
        assert not res.boundary[j]

    def test_interval_support_function(self):
        g = line(-8, 8, 1601)
        vals = np.where(np.abs(g.axes[0]) <= 1.0 + 1e-12, 0.0, np.inf)
        res = lft_1d(fun(g, vals), line(-4, 4, 801))
        j = np.argmin(np.abs(res.function.grid.axes[0] - 2.0))
        assert res.function.values[j] == 2.0
        assert not res.boundary[j]

    def test_abs_conjugate_and_boundary_flags(self):
        g = line(-8, 8, 1601)
        res = lft_1d(fun(g, np.abs(g.axes[0])), line(-4, 4, 801))
        y = res.function.grid.axes[0]
        j_half = np.argmin(np.abs(y - 0.5))
        j_two = np.argmin(np.abs(y - 2.0))
        assert res.function.values[j_half] == 0.0
        assert res.boundary[j_two]        # maximizer ran into the box
        assert not res.boundary[j_half]

    def test_empty_domain(self):
        g = line(-1, 1, 5)
        with pytest.raises(EmptyDomainError):
            lft_1d(fun(g, np.full(5, np.inf)))

    def test_matches_brute_force_randomized(self):
        rng = np.random.default_rng(101)
        for trial in range(60):
            n = int(rng.integers(5, 202))
            m = int(rng.integers(5, 202))
            g = line(-8, 8, n)
            dual = line(-6, 6, m)
            vals = rng.normal(0, 3, n)
            if trial % 3 == 0:
                vals[rng.random(n) < 0.3] = np.inf
                if not np.isfinite(vals).any():
                    vals[0] = 0.0
            res = lft_1d(fun(g, vals), dual)
            brute, barg = brute_lft_1d(g.axes[0], vals, dual.axes[0])
            assert np.array_equal(res.function.values, brute)
            assert np.array_equal(res.argmax, barg)


class TestLft2d:
    def test_quadratic(self):
        # 161 nodes put the query point on the primal lattice, keeping the
        # envelope quantization well below the tolerance
        g = square(4.0, 161)
        X, Y = np.meshgrid(*g.axes, indexing="ij")
        res = lft(fun(g, (X ** 2 + Y ** 2) / 2), square(2.0, 81))
        ax = res.function.grid.axes[0]
        i = np.argmin(np.abs(ax - 1.0))
        assert res.function.values[i, i] == pytest.approx(1.0, abs=1e-3)

    def test_square_support_function(self):
        g = square(4.0, 161)
        X, Y = np.meshgrid(*g.axes, indexing="ij")
        vals = np.where((np.abs(X) <= 1 + 1e-12) & (np.abs(Y) <= 1 + 1e-12), 0.0, np.inf)
        res = lft(fun(g, vals), square(2.0, 81))
        ax = res.function.grid.axes[0]
        i = np.argmin(np.abs(ax - 1.0))
        j = np.argmin(np.abs(ax - 2.0))
        assert res.function.values[i, j] == pytest.approx(3.0, abs=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(202)
        for trial in range(12):
            n1, n2 = (int(rng.integers(5, 22)) for _ in range(2))
            g = Grid(((-4.0, 4.0), (-4.0, 4.0)), (n1, n2))
            dual = Grid(((-3.0, 3.0), (-3.0, 3.0)),
                        (int(rng.integers(5, 22)), int(rng.integers(5, 22))))
            vals = rng.normal(0, 2, (n1, n2))
            if trial % 3 == 0:
                vals[rng.random((n1, n2)) < 0.25] = np.inf
                if not np.isfinite(vals).any():
                    vals[0, 0] = 0.0
            res = lft(fun(g, vals), dual)
            brute, _ = brute_lft_2d(*g.axes, vals, *dual.axes)
            assert np.array_equal(res.function.values, brute)


class TestBiconjugate:
    def test_convex_quadratic_recovered(self):
        g = line(-8, 8, 401)
        psi = fun(g, g.axes[0] ** 2 / 2)
        out = biconjugate(psi)
        assert np.max(np.abs(out.values - psi.values)) < 1e-4

    def test_w_shape_envelope(self):
        g = line(-8, 8, 1601)
        x = g.axes[0]
        psi = fun(g, np.minimum(np.abs(x - 1), np.abs(x + 1)))
        out = biconjugate(psi)
        mid = np.argmin(np.abs(x))
        assert out.values[mid] == pytest.approx(0.0, abs=1e-12)
        inside = np.abs(x) <= 1
        assert np.max(np.abs(out.values[inside])) <= 1e-12

    def test_idempotent_exactly(self):
        rng = np.random.default_rng(5)
        for trial in range(40):
            n = int(rng.integers(5, 200))
            g = line(-8, 8, n)
            vals = np.cumsum(np.cumsum(rng.uniform(0, 1, n)))
            vals -= vals.mean()
            if trial % 2:
                vals = vals + rng.normal(0, 2, n)
            once = biconjugate(fun(g, vals))
            twice = biconjugate(once)
            assert np.array_equal(once.values, twice.values)

    def test_minorant_convex_and_exact_on_convex(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            x, vals = dyadic_grid_values(rng, 129, convex=True)
            g = line(x[0], x[-1], len(x))
            psi = fun(g, vals)
            out = biconjugate(psi)
            assert np.all(out.values <= psi.values)
            assert out.is_convex()
            # slopes fit the mirrored window, so convex data is a fixed point
            assert np.array_equal(out.values, psi.values)


class TestProperties:
    def test_order_reversal(self):
        rng = np.random.default_rng(8)
        g = line(-8, 8, 101)
        dual = line(-8, 8, 101)
        lo = rng.normal(0, 2, 101)
        hi = lo + rng.uniform(0, 1, 101)
        a = lft(fun(g, lo), dual).function.values
        b = lft(fun(g, hi), dual).function.values
        assert np.all(b <= a)

    def test_fenchel_young(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            x, vals = dyadic_grid_values(rng, 65, convex=True)
            g = line(x[0], x[-1], len(x))
            dual = line(-8, 8, 129)
            conj = lft(fun(g, vals), dual).function
            lhs = vals[:, None] + conj.values[None, :]
            rhs = x[:, None] * dual.axes[0][None, :]
            assert np.all(lhs >= rhs - 1e-12)

    def test_shift_rule_exact_on_dyadic_data(self):
        # lft(pot + c) = lft(pot) - c; exact because every intermediate is a
        # dyadic rational well inside the 53-bit mantissa
        rng = np.random.default_rng(10)
        x, vals = dyadic_grid_values(rng, 129, convex=False)
        g = line(x[0], x[-1], len(x))
        dual = line(-4, 4, 65)
        c = 3.0 + 1.0 / 1024
        plain = lft(fun(g, vals), dual).function.values
        shifted = lft(fun(g, vals + c), dual).function.values
        assert np.array_equal(shifted, plain - c)

    def test_argmax_consistency_quadratic(self):
        g = line(-8, 8, 801)
        rep = argmax_consistency_check(fun(g, g.axes[0] ** 2 / 2))
        assert rep.max_discrepancy <= g.spacing[0] + 1e-12

    def test_argmax_consistency_interval(self):
        g = line(-8, 8, 1601)
        vals = np.where(np.abs(g.axes[0]) <= 1.0 + 1e-12, 0.0, np.inf)
        res = lft_1d(fun(g, vals), line(-4, 4, 801))
        j = np.argmin(np.abs(res.function.grid.axes[0] - 2.0))
        assert g.axes[0][res.argmax[j]] == pytest.approx(1.0, abs=1e-12)

    def test_argmax_consistency_random_piecewise_linear(self):
        rng = np.random.default_rng(11)
        g = line(-8, 8, 51)
        dual = line(-4, 4, 81)
        slopes = np.sort(rng.uniform(-3.5, 3.5, 50))
        vals = np.concatenate([[0], np.cumsum(slopes * np.diff(g.axes[0]))])
        rep = argmax_consistency_check(fun(g, vals), dual)
        assert rep.max_discrepancy <= dual.spacing[0] + g.spacing[0]

    def test_argmax_consistency_requires_convexity(self):
        g = line(-8, 8, 51)
        with pytest.raises(PreconditionError):
            argmax_consistency_check(fun(g, np.cos(g.axes[0])))
