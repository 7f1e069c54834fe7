import numpy as np
import pytest

from logcc import (
    ExtendedGridFunction,
    Grid,
    LogConcaveFunction,
    OutOfDomainError,
    PreconditionError,
    evaluate,
    gradient_map,
    integrate_exp_neg,
    superlevel_perimeter,
    truncation_tail_bound,
)

from oracles import SQRT_2PI


def line(lo, hi, n):
    return Grid(((float(lo), float(hi)),), (int(n),))


def square(half, n):
    return Grid(((-half, half), (-half, half)), (n, n))


def gaussian_1d(n=1001, half=8.0):
    g = line(-half, half, n)
    return LogConcaveFunction(ExtendedGridFunction(g, g.axes[0] ** 2 / 2))


def indicator_1d(radius=1.0, n=1601, half=8.0):
    g = line(-half, half, n)
    vals = np.where(np.abs(g.axes[0]) <= radius + 1e-12, 0.0, np.inf)
    return LogConcaveFunction(ExtendedGridFunction(g, vals))


class TestGrid:
    def test_spacing_and_evenness(self):
        g = line(-8, 8, 1001)
        assert g.spacing == (16.0 / 1000,)
        assert g.is_even
        assert not line(0, 8, 11).is_even

    def test_validation(self):
        with pytest.raises(PreconditionError):
            Grid(((1.0, 1.0),), (5,))
        with pytest.raises(PreconditionError):
            Grid(((0.0, 1.0),), (2,))
        with pytest.raises(PreconditionError):
            Grid(((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (5, 5, 5))

    def test_values_rejects_nan_and_minus_inf(self):
        g = line(-1, 1, 5)
        with pytest.raises(PreconditionError):
            ExtendedGridFunction(g, [0, 1, np.nan, 1, 0])
        with pytest.raises(PreconditionError):
            ExtendedGridFunction(g, [0, 1, -np.inf, 1, 0])


class TestEvaluate:
    def test_node_value(self):
        # x = 1 is a node on a 1601-point grid over [-8, 8]
        g = line(-8, 8, 1601)
        fun = ExtendedGridFunction(g, g.axes[0] ** 2 / 2)
        assert evaluate(fun, [1.0]) == pytest.approx(0.5, abs=1e-14)

    def test_inf_propagates_at_straddling_point(self):
        g = line(-8, 8, 17)
        vals = np.where(g.axes[0] > 0, np.inf, 0.0)
        fun = ExtendedGridFunction(g, vals)
        assert evaluate(fun, [0.5]) == np.inf
        # on-node query next to the inf region stays finite
        assert evaluate(fun, [0.0]) == 0.0

    def test_interpolation_error_within_spacing(self):
        g = line(-8, 8, 1001)
        fun = ExtendedGridFunction(g, np.abs(g.axes[0]))
        x = 0.5004
        assert abs(evaluate(fun, [x]) - abs(x)) <= g.spacing[0]

    def test_outside_box_raises(self):
        g = line(-1, 1, 5)
        fun = ExtendedGridFunction(g, np.zeros(5))
        with pytest.raises(OutOfDomainError):
            evaluate(fun, [1.5])

    def test_2d_bilinear(self):
        g = square(2.0, 41)
        X, Y = np.meshgrid(*g.axes, indexing="ij")
        fun = ExtendedGridFunction(g, X + 2 * Y)
        assert evaluate(fun, [0.33, -0.71]) == pytest.approx(0.33 - 1.42, abs=1e-12)


class TestIntegrateExpNeg:
    def test_gaussian(self):
        f = gaussian_1d()
        assert integrate_exp_neg(f.potential) == pytest.approx(SQRT_2PI, abs=1e-4)

    def test_indicator_volume(self):
        f = indicator_1d(1.0)
        assert integrate_exp_neg(f.potential) == pytest.approx(2.0, abs=f.grid.spacing[0])

    def test_empty_support(self):
        g = line(-1, 1, 5)
        fun = ExtendedGridFunction(g, np.full(5, np.inf))
        assert integrate_exp_neg(fun) == 0.0

    def test_positivity(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            g = line(-4, 4, 51)
            vals = rng.normal(0, 2, 51)
            vals[rng.random(51) < 0.2] = np.inf
            assert integrate_exp_neg(ExtendedGridFunction(g, vals)) >= 0.0

    def test_refinement_improves_gaussian(self):
        # aliasing of the trapezoid rule dominates only on coarse grids;
        # doubling nodes there shrinks the error far more than 2x
        errs = []
        for n in (9, 17):
            g = line(-8, 8, n)
            errs.append(abs(integrate_exp_neg(
                ExtendedGridFunction(g, g.axes[0] ** 2 / 2)) - SQRT_2PI))
        assert errs[0] >= 2 * errs[1]

    def test_tail_bound(self):
        f = gaussian_1d()
        assert truncation_tail_bound(f.potential) == pytest.approx(2 * np.exp(-32.0))


class TestGradientMap:
    def test_quadratic_exact(self):
        f = gaussian_1d(n=161, half=8.0)
        gf = gradient_map(f.potential)
        idx = np.argmin(np.abs(f.grid.axes[0] - 2.0))
        assert gf.vectors[idx, 0] == pytest.approx(2.0, abs=1e-12)

    def test_affine_piece_exact(self):
        # dyadic spacing, so the difference quotient is float-exact
        g = line(-8, 8, 513)
        gf = gradient_map(ExtendedGridFunction(g, np.abs(g.axes[0])))
        idx = np.argmin(np.abs(g.axes[0] - 3.0))
        assert gf.vectors[idx, 0] == 1.0

    def test_one_sided_at_support_edge(self):
        f = indicator_1d(1.0, n=1601)
        gf = gradient_map(f.potential)
        idx = np.argmin(np.abs(f.grid.axes[0] - 1.0))
        assert gf.mask[idx]
        assert gf.vectors[idx, 0] == 0.0

    def test_2d_quadratic(self):
        g = square(4.0, 81)
        X, Y = np.meshgrid(*g.axes, indexing="ij")
        gf = gradient_map(ExtendedGridFunction(g, (X ** 2 + Y ** 2) / 2))
        i = np.argmin(np.abs(g.axes[0] - 1.0))
        j = np.argmin(np.abs(g.axes[1] + 2.0))
        assert np.allclose(gf.vectors[i, j], [1.0, -2.0], atol=1e-10)

    def test_quadratic_matrix_form(self):
        # gradient of <Ax, x>/2 equals Ax to machine precision at interior nodes
        g = square(2.0, 41)
        A = np.array([[2.0, 0.5], [0.5, 1.0]])
        X, Y = np.meshgrid(*g.axes, indexing="ij")
        vals = 0.5 * (A[0, 0] * X ** 2 + 2 * A[0, 1] * X * Y + A[1, 1] * Y ** 2)
        gf = gradient_map(ExtendedGridFunction(g, vals))
        nodes = g.nodes()
        expect = nodes @ A.T
        inner = np.zeros(g.shape, dtype=bool)
        inner[1:-1, 1:-1] = True
        assert np.allclose(gf.vectors[inner], expect[inner], atol=1e-9)


class TestSuperlevelPerimeter:
    def test_gaussian_two_crossings(self):
        assert superlevel_perimeter(gaussian_1d(), 0.5) == 2.0

    def test_above_max_empty(self):
        assert superlevel_perimeter(gaussian_1d(), 1.5) == 0.0

    def test_indicator(self):
        assert superlevel_perimeter(indicator_1d(1.0), 0.5) == 2.0

    def test_disc_circumference(self):
        g = square(2.0, 401)
        X, Y = np.meshgrid(*g.axes, indexing="ij")
        vals = np.where(X ** 2 + Y ** 2 <= 1.0, 0.0, np.inf)
        f = LogConcaveFunction(ExtendedGridFunction(g, vals))
        perim = superlevel_perimeter(f, 0.5)
        assert perim == pytest.approx(2 * np.pi, rel=0.02)

    def test_matches_reference_contouring_on_smooth_data(self):
        skimage = pytest.importorskip("skimage")
        from skimage import measure

        g = square(3.0, 201)
        X, Y = np.meshgrid(*g.axes, indexing="ij")
        f = LogConcaveFunction(ExtendedGridFunction(g, (X ** 2 + Y ** 2) / 2))
        ours = superlevel_perimeter(f, 0.5)
        ref = 0.0
        for c in measure.find_contours(f.density, 0.5):
            d = np.diff(c, axis=0)
            ref += np.sum(np.hypot(d[:, 0], d[:, 1])) * g.spacing[0]
        assert ours == pytest.approx(ref, rel=5e-3)
