import math

import numpy as np
import pytest

from furstlab.bounds import as_fraction, bound_spread_hyperplane
from furstlab.dimension import (
    GridSet,
    box_count,
    cantor_grid,
    estimate_dimension,
    family_dimension,
    flat_slice,
    grid_from_points,
    sharp_hyperplane_example,
    slicing_product_example,
)
from furstlab.grassmann import AffineFlat, Subspace, haar_sample

LOG32 = math.log(2) / math.log(3)


def full_cube(n, level):
    return cantor_grid(n, 2, [0, 1], level)


class TestGridSet:
    def test_dedup_and_range(self):
        g = GridSet(2, 3, np.array([[1, 2], [1, 2], [0, 0]]))
        assert len(g) == 2
        with pytest.raises(ValueError):
            GridSet(2, 3, np.array([[8, 0]]))
        with pytest.raises(ValueError):
            GridSet(2, 3, np.array([[-1, 0]]))

    def test_downsample_parents_occupied(self):
        g = cantor_grid(2, 3, [0, 2], 4)
        coarse = g.downsample(g.level - 1)
        parents = {tuple(c) for c in coarse.cells}
        for cell in g.cells:
            assert tuple(cell >> 1) in parents

    def test_downsample_count_bracket(self):
        g = cantor_grid(2, 3, [0, 2], 4)
        for lv in range(1, g.level):
            n_fine = box_count(g, lv + 1)
            n_coarse = box_count(g, lv)
            assert n_coarse <= n_fine <= (2**g.n) * n_coarse

    def test_csv_roundtrip(self):
        g = cantor_grid(2, 3, [0, 2], 3)
        g2 = GridSet.from_csv(g.to_csv(), g.level)
        assert np.array_equal(g.cells, g2.cells)

    def test_rle_roundtrip(self):
        for g in (cantor_grid(1, 3, [0, 2], 6), full_cube(2, 4),
                  GridSet(2, 4, np.zeros((0, 2), dtype=np.int64))):
            g2 = GridSet.from_rle(g.to_rle())
            assert (g2.n, g2.level) == (g.n, g.level)
            assert np.array_equal(g.cells, g2.cells)


class TestBoxCount:
    def test_full_cube(self):
        g = full_cube(2, 5)
        for lv in (1, 3, 5):
            assert box_count(g, lv) == 2 ** (2 * lv)

    def test_single_point(self):
        g = GridSet(3, 6, np.array([[5, 9, 31]]))
        for lv in range(0, 7):
            assert box_count(g, lv) == 1

    def test_level_above_depth_raises(self):
        with pytest.raises(ValueError):
            box_count(full_cube(1, 3), 4)

    def test_cantor_count_law(self):
        # one marked cell per kept construction cell
        for depth in (3, 5, 8):
            g = cantor_grid(1, 3, [0, 2], depth)
            assert len(g) == 2**depth


class TestEstimateDimension:
    def test_full_square(self):
        est = estimate_dimension(full_cube(2, 8), 2, 8)
        assert est.slope == pytest.approx(2.0, abs=1e-9)
        assert est.r2 == pytest.approx(1.0, abs=1e-12)

    def test_single_point(self):
        g = GridSet(2, 8, np.array([[3, 7]]))
        est = estimate_dimension(g, 2, 8)
        assert est.slope == pytest.approx(0.0, abs=1e-12)

    def test_middle_thirds(self):
        g = cantor_grid(1, 3, [0, 2], 8)
        est = estimate_dimension(g, 4, 8)
        assert abs(est.slope - LOG32) <= 0.05

    def test_level_validation(self):
        g = full_cube(1, 4)
        with pytest.raises(ValueError):
            estimate_dimension(g, 3, 3)
        with pytest.raises(ValueError):
            estimate_dimension(g, 1, 9)

    def test_slope_in_range(self):
        rng = np.random.default_rng(0)
        pts = rng.random((500, 2))
        est = estimate_dimension(grid_from_points(pts, 8), 2, 8)
        assert 0.0 <= est.slope <= 2.0

    def test_products_add(self):
        a = cantor_grid(1, 3, [0, 2], 6)
        b = cantor_grid(1, 3, [0, 1, 2], 6)
        prod = cantor_grid(2, 3, [[0, 2], [0, 1, 2]], 6)
        sa = estimate_dimension(a, 3, 8).slope
        sb = estimate_dimension(b, 3, 8).slope
        sp = estimate_dimension(prod, 3, 8).slope
        assert abs(sp - sa - sb) <= 0.1


class TestCantorGrid:
    def test_keep_all_base2_is_full_cube(self):
        g = cantor_grid(2, 2, [0, 1], 4)
        assert len(g) == 2 ** (2 * 4)

    def test_keep_all_base3_counts_full_at_fit_levels(self):
        g = cantor_grid(1, 3, [0, 1, 2], 6)
        for lv in range(1, 9):
            assert box_count(g, lv) == 2**lv
        assert estimate_dimension(g, 2, 8).slope == pytest.approx(1.0, abs=1e-9)

    def test_product_dimension(self):
        g = cantor_grid(2, 3, [[0, 2], [0, 1, 2]], 7)
        est = estimate_dimension(g, 3, 9)
        assert abs(est.slope - (1 + LOG32)) <= 0.1

    def test_validation(self):
        with pytest.raises(ValueError):
            cantor_grid(1, 1, [0], 3)
        with pytest.raises(ValueError):
            cantor_grid(1, 3, [], 3)
        with pytest.raises(ValueError):
            cantor_grid(1, 3, [0, 3], 3)
        with pytest.raises(ValueError):
            cantor_grid(2, 3, [0, 2], 12)  # resolution overflow


class TestGridFromPoints:
    def test_unit_points(self):
        pts = np.array([[0.1, 0.1], [0.9, 0.9]])
        g = grid_from_points(pts, 4)
        assert len(g) == 2

    def test_scaling_invariance_of_slope(self):
        rng = np.random.default_rng(1)
        pts = rng.random((2000, 1))
        s1 = estimate_dimension(grid_from_points(pts, 8), 2, 7).slope
        s2 = estimate_dimension(grid_from_points(7.3 * pts + 11, 8), 2, 7).slope
        assert abs(s1 - s2) <= 0.1


class TestSharpHyperplaneExample:
    def test_containment(self):
        ex = sharp_hyperplane_example(4, 1.5, depth=3)
        centers = ex.grid.centers()
        for flat in ex.family.flats:
            nu = flat.direction.complement_basis()[:, 0]
            assert np.abs(centers @ nu).max() <= 2.0**-3

    def test_family_dimension_near_one(self):
        ex = sharp_hyperplane_example(4, 1.5, depth=3)
        est = family_dimension([f.direction for f in ex.family.flats], 2, 6)
        assert abs(est.slope - 1.0) <= 0.15

    def test_sharpness_identity_exact(self):
        ex = sharp_hyperplane_example(4, 1.5, depth=3)
        s_star = as_fraction(ex.achieved_dimension)
        t = 4 - 1 - math.ceil(ex.achieved_dimension)
        assert bound_spread_hyperplane(4, s_star, t) == s_star

    def test_achieved_close_to_target(self):
        ex = sharp_hyperplane_example(4, 1.5, depth=3)
        assert ex.achieved_dimension == pytest.approx(1 + LOG32)

    def test_validation(self):
        with pytest.raises(ValueError):
            sharp_hyperplane_example(2, 1.5, 3)
        with pytest.raises(ValueError):
            sharp_hyperplane_example(4, 1.0, 3)

    def test_ceil_s_equals_n_minus_one_single_plane(self):
        ex = sharp_hyperplane_example(3, 1.5, depth=3)
        assert len(ex.family) == 1
        nu = ex.family.flats[0].direction.complement_basis()[:, 0]
        assert np.abs(ex.grid.centers() @ nu).max() <= 2.0**-3


class TestSlicingProductExample:
    def test_dimension_estimate(self):
        ex = slicing_product_example(2, 1, LOG32, 7)
        est = estimate_dimension(ex.grid, 3, 8)
        assert abs(est.slope - ex.achieved_dimension) <= 0.1

    def test_s_equals_k_full_cube(self):
        ex = slicing_product_example(2, 1, 1.0, 4)
        est = estimate_dimension(ex.grid, 2, 6)
        assert est.slope == pytest.approx(2.0, abs=1e-9)

    def test_spread_slices(self):
        # Generic directions admit a translate whose slice carries the
        # Cantor factor's dimension.
        ex = slicing_product_example(2, 1, LOG32, 7)
        need = ex.achieved_slice_dimension - 0.15
        rng = np.random.default_rng(9)
        for _ in range(20):
            u = haar_sample(2, 1, rng)
            w = u.complement_basis()[:, 0]
            best = -1.0
            for tau in np.linspace(-0.7, 1.4, 22):
                flat = AffineFlat(u, w * tau)
                sl = flat_slice(ex.grid, flat, rho=2.0**-8)
                if len(sl) < 8:
                    continue
                best = max(best, estimate_dimension(sl, 3, 8).slope)
            assert best >= need

    def test_validation(self):
        with pytest.raises(ValueError):
            slicing_product_example(2, 2, 1.0, 4)
        with pytest.raises(ValueError):
            slicing_product_example(3, 1, 1.5, 4)


class TestFlatSlice:
    def test_axis_slice_recovers_cantor_factor(self):
        ex = slicing_product_example(2, 1, LOG32, 7)
        e1 = Subspace(2, 1, np.array([[1.0], [0.0]]))
        sl = flat_slice(ex.grid, AffineFlat(e1, np.array([0.0, 0.5])), rho=2.0**-8)
        est = estimate_dimension(sl, 3, 8)
        assert abs(est.slope - ex.achieved_slice_dimension) <= 0.1

    def test_missing_flat_empty(self):
        g = full_cube(2, 5)
        e1 = Subspace(2, 1, np.array([[1.0], [0.0]]))
        far = AffineFlat(e1, np.array([0.0, 7.0]))
        assert len(flat_slice(g, far, rho=0.1)) == 0

    def test_monotone_in_rho(self):
        g = cantor_grid(2, 3, [0, 2], 5)
        u = haar_sample(2, 1, seed=3)
        flat = AffineFlat.through(u, np.array([0.4, 0.5]))
        counts = [len(flat_slice(g, flat, rho)) for rho in (0.05, 0.1, 0.2)]
        assert counts == sorted(counts)

    def test_rho_validation(self):
        g = full_cube(2, 5)
        e1 = Subspace(2, 1, np.array([[1.0], [0.0]]))
        with pytest.raises(ValueError):
            flat_slice(g, AffineFlat(e1, np.zeros(2)), rho=2.0**-9)


class TestFamilyDimension:
    def test_single_subspace_zero(self):
        u = haar_sample(3, 1, seed=0)
        assert family_dimension([u], 2, 6).slope == pytest.approx(0.0, abs=1e-12)

    def test_uniform_circle_of_lines(self):
        subs = [
            Subspace(2, 1, np.array([[math.cos(t)], [math.sin(t)]]))
            for t in np.linspace(0, math.pi, 1000, endpoint=False)
        ]
        est = family_dimension(subs, 2, 6)
        assert abs(est.slope - 1.0) <= 0.15

    def test_horizontal_lines_family(self):
        e1 = Subspace(2, 1, np.array([[1.0], [0.0]]))
        rng = np.random.default_rng(5)
        b = (np.arange(1000) + 0.05 + 0.9 * rng.random(1000)) / 1000
        flats = [AffineFlat(e1, np.array([0.0, float(v)])) for v in b]
        est = family_dimension(flats, 2, 6)
        assert abs(est.slope - 1.0) <= 0.15

    def test_mixed_types_rejected(self):
        u = haar_sample(3, 1, seed=0)
        flat = AffineFlat(u, np.zeros(3))
        with pytest.raises(ValueError):
            family_dimension([u, flat], 2, 6)
        with pytest.raises(ValueError):
            family_dimension([], 2, 6)

    def test_max_entry_norm_equivalence(self):
        # max-entry distance <= operator distance <= n * max-entry distance,
        # so the grid embedding preserves dimension.
        from furstlab.grassmann import grass_distance

        rng = np.random.default_rng(12)
        for _ in range(1000):
            u = haar_sample(4, 2, rng)
            v = haar_sample(4, 2, rng)
            entry = np.abs(u.projector() - v.projector()).max()
            op = grass_distance(u, v)
            assert entry <= op + 1e-9
            assert op <= 4 * entry + 1e-9
