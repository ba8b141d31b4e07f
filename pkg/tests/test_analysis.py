import numpy as np
import pytest

from dyadlab import (
    FactorFunction,
    GridFunction,
    HaarIndex,
    Mesh,
    haar_values,
    pair,
    sample_shift,
    shift_cube,
    shifted_grid,
    standard_grid,
    tensor_product,
)
from dyadlab.analysis import aux_phi, phi_adapted, phi_sharp, square_function
from dyadlab.grids import DyadicRectangle
from dyadlab.maximal import maximal
from dyadlab.samplers import ShiftSampler
from dyadlab.signal import cube_average, pair_tables, partial_pair

MESH = Mesh(1, 1, 3)


def gf(rng, mesh=MESH):
    return GridFunction(mesh, rng.standard_normal(mesh.shape))


class TestSquareFunction:
    def test_constant_killed(self):
        g1, g2 = standard_grid(MESH, 1), standard_grid(MESH, 2)
        f = GridFunction.constant(MESH, 3.0)
        for mode, kw in (("bipar", {"grids": (g1, g2)}), ("par1", {"grid": g1}), ("par2", {"grid": g2})):
            np.testing.assert_allclose(square_function(f, mode, **kw).values, 0.0, atol=1e-13)

    def test_parseval_bookkeeping(self, rng):
        # ||Sf||_2^2 equals the both-oscillating coefficient mass exactly
        f = gf(rng)
        g1 = shifted_grid(MESH, sample_shift(rng, MESH, 1))
        g2 = shifted_grid(MESH, sample_shift(rng, MESH, 2))
        s = square_function(f, "bipar", grids=(g1, g2))
        mass = (pair_tables(f, g1, g2)[1, 1] ** 2).sum()
        assert pair(s, s) == pytest.approx(mass, abs=1e-12)

    def test_tilde_tensor_factorization(self, rng):
        gv = rng.standard_normal(MESH.cells)
        uv = rng.standard_normal(MESH.cells)
        f = tensor_product(FactorFunction(MESH, 1, gv), FactorFunction(MESH, 2, uv))
        shift = sample_shift(rng, MESH, 2)
        got = square_function(f, "tilde2", shift=shift)
        su = square_function(FactorFunction(MESH, 2, uv), "tilde", shift=shift)
        want = np.abs(gv)[:, None] * su.values[None, :]
        np.testing.assert_allclose(got.values, want, atol=1e-12)

    def test_tilde_matches_naive(self, rng):
        uv = rng.standard_normal(MESH.cells)
        u = FactorFunction(MESH, 2, uv)
        shift = sample_shift(rng, MESH, 2)
        got = square_function(u, "tilde", shift=shift)
        std = standard_grid(MESH, 2)
        acc = np.zeros(MESH.cells)
        for v_std in std.all_cubes():
            if v_std.level == MESH.level:
                continue
            moved = shift_cube(v_std, shift)
            coeff = pair(u, haar_values(HaarIndex(moved, (1,))))
            acc += coeff**2 * v_std.indicator() / v_std.volume
        np.testing.assert_allclose(got.values, np.sqrt(acc), atol=1e-12)


class TestPhiSharp:
    def test_single_tensor_term(self, rng):
        g1 = standard_grid(MESH, 1)
        cube = g1.cube(1, (1,))
        u = FactorFunction(MESH, 2, rng.standard_normal(MESH.cells))
        f = tensor_product(haar_values(HaarIndex(cube, (1,))), u)
        got = phi_sharp(f, g1)
        mu = maximal(u, "nondyadic")
        want = tensor_product(haar_values(HaarIndex(cube, (1,))), mu)
        np.testing.assert_allclose(got.values, want.values, atol=1e-12)

    def test_constant_killed(self):
        g1 = standard_grid(MESH, 1)
        np.testing.assert_allclose(
            phi_sharp(GridFunction.constant(MESH, 2.0), g1).values, 0.0, atol=1e-13
        )

    def test_matches_naive(self, rng):
        f = gf(rng)
        g1 = shifted_grid(MESH, sample_shift(rng, MESH, 1))
        acc = np.zeros(MESH.shape)
        for cube in g1.all_cubes():
            if cube.level == MESH.level:
                continue
            h = HaarIndex(cube, (1,))
            coeff = partial_pair(f, h)
            acc += np.outer(haar_values(h).values, maximal(coeff, "nondyadic").values)
        np.testing.assert_allclose(phi_sharp(f, g1).values, acc, atol=1e-12)

    def test_l2_ratio_sweep(self, rng):
        # unweighted L2: phi is an isometry onto maximal-coefficient mass
        g1 = standard_grid(MESH, 1)
        ratios = []
        for _ in range(20):
            f = gf(rng)
            ratios.append(pair(phi_sharp(f, g1), phi_sharp(f, g1)) ** 0.5 / pair(f, f) ** 0.5)
        assert max(ratios) < 10.0


class TestPhiAdapted:
    def test_constant_symbol_or_function(self, rng):
        g2 = standard_grid(MESH, 2)
        b = GridFunction.constant(MESH, 5.0)
        f = gf(rng)
        np.testing.assert_allclose(phi_adapted(b, f, g2).values, 0.0, atol=1e-13)
        np.testing.assert_allclose(
            phi_adapted(gf(rng), GridFunction.constant(MESH, 1.0), g2).values, 0.0, atol=1e-13
        )

    def test_domination_of_shifted_average_differences(self, rng):
        # |<(<b>_{V,2} - <b>_{I x V}) <f,h_V>_2, h0_I>| <= <phi_b f, h0_I ⊗ h_V>
        for trial in range(5):
            b, f = gf(rng), gf(rng)
            shift2 = sample_shift(rng, MESH, 2)
            g2 = shifted_grid(MESH, shift2)
            g1 = shifted_grid(MESH, sample_shift(rng, MESH, 1))
            ph = phi_adapted(b, f, g2)
            for V in g2.all_cubes():
                if V.level == MESH.level:
                    continue
                hv = HaarIndex(V, (1,))
                coeff = partial_pair(f, hv)  # <f, h_V>_2 (x1)
                bavg = cube_average(b, V)  # <b>_{V,2}(x1)
                for I in g1.all_cubes():
                    h0 = HaarIndex(I, (0,))
                    rect_avg = cube_average(b, DyadicRectangle(I, V))
                    inner = (bavg - rect_avg) * coeff
                    lhs = abs(pair(inner, haar_values(h0)))
                    rhs = pair(ph, tensor_product(haar_values(h0), haar_values(hv)))
                    assert lhs <= rhs + 1e-10


class TestAuxPhi:
    def test_zero_input(self):
        sampler2 = ShiftSampler(MESH, 2, count=4, seed=1)
        sampler1 = ShiftSampler(MESH, 1, count=4, seed=1)
        z = GridFunction.zeros(MESH)
        b = GridFunction(MESH, np.arange(64).reshape(MESH.shape) / 64.0)
        for kind, kw in (
            ("partial1", {"b": b, "sampler": sampler2}),
            ("partial2", {"depth": 1, "sampler": sampler1}),
            ("full1", {"sampler": sampler2}),
            ("full2", {"b": b, "variant": 1, "sampler": sampler1}),
        ):
            np.testing.assert_allclose(aux_phi(z, kind, **kw).values, 0.0, atol=1e-13)

    def test_partial2_single_term_positive_on_cube(self, rng):
        # depth 0, f = h_K ⊗ u: the K-block of phi recovers a positive bump on K
        g1 = standard_grid(MESH, 1)
        K = g1.cube(1, (0,))
        u = FactorFunction(MESH, 2, 1.0 + np.abs(rng.standard_normal(MESH.cells)))
        f = tensor_product(haar_values(HaarIndex(K, (1,))), u)
        sampler = ShiftSampler(MESH, 1, seed=3, exact=True)
        out = aux_phi(f, "partial2", depth=0, sampler=sampler)
        assert out.values.min() >= -1e-12
        assert out.values[K.coord_cells()[0], :].max() > 0.1

    def test_deterministic_given_seed(self, rng):
        f = gf(rng)
        b = gf(rng)
        s = ShiftSampler(MESH, 2, count=6, seed=9)
        a = aux_phi(f, "partial1", b=b, sampler=s)
        bb = aux_phi(f, "partial1", b=b, sampler=ShiftSampler(MESH, 2, count=6, seed=9))
        np.testing.assert_array_equal(a.values, bb.values)

    def test_l2_ratio_bounded_across_depths(self, rng):
        # the depth parameter must not inflate the operator
        sampler = ShiftSampler(MESH, 1, count=8, seed=5)
        ratios = {}
        for depth in (0, 1, 2):
            vals = []
            for _ in range(5):
                f = gf(rng)
                out = aux_phi(f, "partial2", depth=depth, sampler=sampler)
                vals.append(pair(out, out) ** 0.5 / pair(f, f) ** 0.5)
            ratios[depth] = max(vals)
        spread = max(ratios.values()) / max(min(ratios.values()), 1e-12)
        assert spread < 5.0

    def test_validation(self, rng):
        f = gf(rng)
        with pytest.raises(ValueError):
            aux_phi(f, "partial1", sampler=ShiftSampler(MESH, 2, count=2))
        with pytest.raises(ValueError):
            aux_phi(f, "partial2", depth=0, sampler=ShiftSampler(MESH, 2, count=2))
        with pytest.raises(ValueError):
            aux_phi(f, "nope", sampler=ShiftSampler(MESH, 2, count=2))
