import numpy as np
import pytest

from dyadlab import (
    DyadicRectangle,
    GridFunction,
    HaarIndex,
    Mesh,
    haar_pair,
    haar_values,
    martingale_difference,
    pair,
    sample_shift,
    shifted_grid,
    standard_grid,
    tensor_product,
)
from dyadlab.mesh import FactorFunction
from dyadlab.paraproducts import (
    all_biparameter_paraproducts,
    biparameter_paraproduct,
    expand_product,
    expansion_residual_both,
    expansion_residual_mixed,
    expansion_residual_none,
    indicator_block_decomposition,
    oneparameter_paraproduct,
)
from dyadlab.signal import average_projection

MESH = Mesh(1, 1, 3)


def gf(rng, mesh=MESH):
    return GridFunction(mesh, rng.standard_normal(mesh.shape))


def std_grids(mesh=MESH):
    return standard_grid(mesh, 1), standard_grid(mesh, 2)


def naive_biparameter(index, b, f, g1, g2):
    """Direct cube-by-cube sums from the defining formulas."""
    forms = {
        1: ("dd", "dd"), 2: ("dd", "ed"), 3: ("dd", "de"), 4: ("dd", "ee"),
        5: ("ed", "dd"), 6: ("ed", "de"), 7: ("de", "dd"), 8: ("de", "ed"),
    }

    def piece(func, I, J, form):
        first = martingale_difference(func, I, "delta" if form[0] == "d" else "average")
        return martingale_difference(first, J, "delta" if form[1] == "d" else "average")

    bform, fform = forms[index]
    acc = np.zeros(b.mesh.shape)
    for I in g1.all_cubes():
        if I.level == b.mesh.level:
            continue
        for J in g2.all_cubes():
            if J.level == b.mesh.level:
                continue
            acc = acc + piece(b, I, J, bform).values * piece(f, I, J, fform).values
    return acc


class TestBiparameter:
    def test_constant_symbol_kills_all(self, rng):
        g1, g2 = std_grids()
        b = GridFunction.constant(MESH, 2.0)
        f = gf(rng)
        for i in range(1, 9):
            np.testing.assert_allclose(
                biparameter_paraproduct(i, b, f, g1, g2).values, 0.0, atol=1e-13
            )

    def test_top_haar_square(self):
        # b = f = h ⊗ h at the top cubes: index 1 gives (h ⊗ h)^2 = 1
        g1, g2 = std_grids()
        hx = haar_values(HaarIndex(g1.top(), (1,)))
        hy = haar_values(HaarIndex(g2.top(), (1,)))
        b = tensor_product(hx, hy)
        out = biparameter_paraproduct(1, b, b, g1, g2)
        np.testing.assert_allclose(out.values, 1.0, atol=1e-13)
        # index 2 pairs it against E^1 Delta^2 b, whose first-factor average vanishes
        np.testing.assert_allclose(biparameter_paraproduct(2, b, b, g1, g2).values, 0.0, atol=1e-13)

    def test_matches_naive_sums(self, rng):
        b, f = gf(rng), gf(rng)
        g1 = shifted_grid(MESH, sample_shift(rng, MESH, 1))
        g2 = shifted_grid(MESH, sample_shift(rng, MESH, 2))
        for i in (1, 2, 4, 5, 7, 8):
            got = biparameter_paraproduct(i, b, f, g1, g2).values
            np.testing.assert_allclose(got, naive_biparameter(i, b, f, g1, g2), atol=1e-11)

    def test_all_matches_single(self, rng):
        b, f = gf(rng), gf(rng)
        g1, g2 = std_grids()
        every = all_biparameter_paraproducts(b, f, g1, g2)
        for i in (3, 6):
            np.testing.assert_allclose(
                every[i].values, biparameter_paraproduct(i, b, f, g1, g2).values, atol=1e-13
            )

    def test_bilinear(self, rng):
        g1, g2 = std_grids()
        b1, b2, f = gf(rng), gf(rng), gf(rng)
        lhs = biparameter_paraproduct(3, b1 + 2.0 * b2, f, g1, g2).values
        rhs = (
            biparameter_paraproduct(3, b1, f, g1, g2).values
            + 2.0 * biparameter_paraproduct(3, b2, f, g1, g2).values
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestOneparameter:
    def test_constant_killed(self, rng):
        g1, _ = std_grids()
        out = oneparameter_paraproduct(1, 1, GridFunction.constant(MESH, 1.5), gf(rng), g1)
        np.testing.assert_allclose(out.values, 0.0, atol=1e-13)

    def test_telescoping_against_average(self, rng):
        # variant 2 with f = 1 telescopes to b minus its first-factor average
        g1, _ = std_grids()
        b = gf(rng)
        out = oneparameter_paraproduct(2, 1, b, GridFunction.constant(MESH, 1.0), g1)
        expected = b.values - average_projection(b, g1, 0).values
        np.testing.assert_allclose(out.values, expected, atol=1e-12)

    def test_matches_naive(self, rng):
        b, f = gf(rng), gf(rng)
        g2 = shifted_grid(MESH, sample_shift(rng, MESH, 2))
        for variant in (1, 2):
            got = oneparameter_paraproduct(variant, 2, b, f, g2).values
            acc = np.zeros(MESH.shape)
            for J in g2.all_cubes():
                if J.level == MESH.level:
                    continue
                dbj = martingale_difference(b, J, "delta").values
                other = martingale_difference(f, J, "delta" if variant == 1 else "average").values
                acc += dbj * other
            np.testing.assert_allclose(got, acc, atol=1e-12)

    def test_localisation(self, rng):
        # <a(b, f), h_K ⊗ 1_V/|V|> only sees f on K x V
        g1, g2 = std_grids()
        b, f = gf(rng), gf(rng)
        for K in g1.all_cubes():
            if K.level == MESH.level:
                continue
            hK = HaarIndex(K, (1,))
            for V in g2.all_cubes():
                ind = DyadicRectangle(K, V).indicator()
                floc = GridFunction(MESH, f.values * ind)
                h0V = HaarIndex(V, (0,))
                w = V.volume**-0.5
                for variant in (1, 2):
                    full = haar_pair(oneparameter_paraproduct(variant, 1, b, f, g1), hK, h0V) * w
                    loc = haar_pair(oneparameter_paraproduct(variant, 1, b, floc, g1), hK, h0V) * w
                    assert full == pytest.approx(loc, abs=1e-12)


class TestBlockDecomposition:
    def test_reassembles_indicator_times_symbol(self, rng):
        g1, g2 = std_grids()
        b = gf(rng)
        rect = DyadicRectangle(g1.cube(1, (0,)), g2.cube(2, (3,)))
        blocks = indicator_block_decomposition(b, rect)
        total = sum(part.values for part in blocks.values())
        np.testing.assert_allclose(total, b.values * rect.indicator(), atol=1e-13)

    def test_blocks_match_martingale_sums(self, rng):
        g1, g2 = std_grids()
        b = gf(rng)
        I0, J0 = g1.cube(1, (1,)), g2.cube(1, (0,))
        rect = DyadicRectangle(I0, J0)
        blocks = indicator_block_decomposition(b, rect)
        both = np.zeros(MESH.shape)
        for I in g1.all_cubes():
            if I.level == MESH.level or not I0.contains(I):
                continue
            for J in g2.all_cubes():
                if J.level == MESH.level or not J0.contains(J):
                    continue
                both += martingale_difference(b, DyadicRectangle(I, J), "delta").values
        np.testing.assert_allclose(blocks["both"].values, both, atol=1e-12)
        axis2 = np.zeros(MESH.shape)
        for J in g2.all_cubes():
            if J.level == MESH.level or not J0.contains(J):
                continue
            dj = martingale_difference(b, J, "delta")
            axis2 += martingale_difference(dj, I0, "average").values
        np.testing.assert_allclose(blocks["axis2"].values, axis2, atol=1e-12)


class TestExpansion:
    @pytest.mark.parametrize("mode", ["both", "axis1", "axis2", "none"])
    def test_residuals_random(self, rng, mode):
        b, f = gf(rng), gf(rng)
        g1, g2 = std_grids()
        for rect in (
            DyadicRectangle(g1.cube(0, (0,)), g2.cube(0, (0,))),
            DyadicRectangle(g1.cube(1, (1,)), g2.cube(2, (2,))),
        ):
            if mode == "both" and (rect.first.level == MESH.level or rect.second.level == MESH.level):
                continue
            out = expand_product(b, f, rect, mode)
            assert out.relative_residual < 1e-12

    def test_structural_term_counts(self, rng):
        b, f = gf(rng), gf(rng)
        g1, g2 = std_grids()
        rect = DyadicRectangle(g1.cube(1, (0,)), g2.cube(1, (1,)))
        assert len(expand_product(b, f, rect, "both").terms) == 9
        assert len(expand_product(b, f, rect, "axis1").terms) == 4
        assert len(expand_product(b, f, rect, "none").terms) == 2

    def test_constant_symbol_degenerates(self, rng):
        g1, g2 = std_grids()
        b = GridFunction.constant(MESH, 3.0)
        f = gf(rng)
        rect = DyadicRectangle(g1.cube(1, (0,)), g2.cube(1, (1,)))
        out = expand_product(b, f, rect, "both")
        for name, value in out.terms.items():
            if name != "average":
                assert abs(value) < 1e-13
        hx, hy = HaarIndex(rect.first, (1,)), HaarIndex(rect.second, (1,))
        assert out.lhs == pytest.approx(3.0 * haar_pair(f, hx, hy), abs=1e-13)

    def test_middle_term_vanishes_for_first_variable_symbol(self, rng):
        # <b>_{I0,1} is constant when b depends on x1 only
        g1, g2 = std_grids()
        bvals = np.broadcast_to(rng.standard_normal(MESH.cells)[:, None], MESH.shape)
        b = GridFunction(MESH, np.array(bvals))
        f = gf(rng)
        rect = DyadicRectangle(g1.cube(1, (0,)), g2.cube(1, (1,)))
        out = expand_product(b, f, rect, "axis1")
        assert abs(out.terms["middle"]) < 1e-13
        # for a second-variable symbol the middle term is generically nonzero
        bvals2 = np.broadcast_to(rng.standard_normal(MESH.cells)[None, :], MESH.shape)
        out2 = expand_product(GridFunction(MESH, np.array(bvals2)), f, rect, "axis1")
        assert abs(out2.terms["middle"]) > 1e-8

    def test_residual_tables_random_grids(self, rng):
        for _ in range(5):
            b, f = gf(rng), gf(rng)
            g1 = shifted_grid(MESH, sample_shift(rng, MESH, 1))
            g2 = shifted_grid(MESH, sample_shift(rng, MESH, 2))
            assert expansion_residual_both(b, f, g1, g2).max() < 1e-10
            assert expansion_residual_mixed(b, f, g1, g2, "axis1").max() < 1e-10
            assert expansion_residual_mixed(b, f, g1, g2, "axis2").max() < 1e-10
            assert expansion_residual_none(b, f, g1, g2).max() < 1e-10

    def test_table_matches_pointwise(self, rng):
        b, f = gf(rng), gf(rng)
        g1, g2 = std_grids()
        res = expansion_residual_both(b, f, g1, g2)
        rect = DyadicRectangle(g1.cube(1, (0,)), g2.cube(2, (1,)))
        point = expand_product(b, f, rect, "both")
        i, j = g1.cube_index(rect.first), g2.cube_index(rect.second)
        assert res[i, j] == pytest.approx(point.relative_residual, abs=1e-12)
