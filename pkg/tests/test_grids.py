import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadlab import (
    DyadicCube,
    GridShift,
    HaarIndex,
    Mesh,
    ResolutionError,
    ancestor,
    children,
    enumerate_cubes,
    enumerate_shifts,
    sample_shift,
    shift_cube,
    shifted_grid,
    standard_grid,
)


def bits_for(mesh, axis, scale_bits):
    """Shift with 1-bits exactly at the given scales (1-indexed)."""
    d = mesh.factor_dim(axis)
    rows = [tuple(1 if i in scale_bits else 0 for _ in range(d)) for i in range(1, mesh.level + 1)]
    return GridShift(axis, tuple(rows))


class TestEnumerate:
    def test_level_zero_is_torus(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        (top,) = enumerate_cubes(g, 0)
        assert top.offset == (0,) and top.side_cells == 8

    def test_level_one_standard(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        assert [c.offset for c in enumerate_cubes(g, 1)] == [(0,), (4,)]

    def test_level_one_quarter_shift(self):
        # translation 1/4 at level 1 comes from the scale-2 bit
        mesh = Mesh(1, 1, 4)
        g = shifted_grid(mesh, bits_for(mesh, 1, {2}))
        cubes = enumerate_cubes(g, 1)
        assert [c.offset for c in cubes] == [(4,), (12,)]
        assert cubes[1].wraps()

    @pytest.mark.parametrize("level", range(5))
    def test_partition(self, level, rng):
        mesh = Mesh(1, 1, 4)
        g = shifted_grid(mesh, sample_shift(rng, mesh, 1))
        cubes = enumerate_cubes(g, level)
        assert len(cubes) == 2**level
        total = sum(c.indicator() for c in cubes)
        assert np.array_equal(total, np.ones(mesh.cells))

    def test_partition_2d_factor(self, rng):
        mesh = Mesh(2, 1, 3)
        g = shifted_grid(mesh, sample_shift(rng, mesh, 1))
        cubes = enumerate_cubes(g, 2)
        assert len(cubes) == 4**2
        total = sum(c.indicator() for c in cubes)
        assert np.array_equal(total, np.ones((8, 8)))

    def test_too_deep(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        with pytest.raises(ResolutionError):
            enumerate_cubes(g, 4)


class TestAncestor:
    def test_identity_and_parent(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        c = g.cube(2, (0,))  # [0, 1/4)
        assert ancestor(c, 0) == c
        assert ancestor(c, 1) == g.cube(1, (0,))

    def test_nesting_chain(self):
        # [3/8,1/2): parents [1/4,1/2), [0,1/2), [0,1)
        g = standard_grid(Mesh(1, 1, 4), 1)
        c = g.cube(3, (3,))
        assert ancestor(c, 1) == g.cube(2, (1,))
        assert ancestor(c, 2) == g.cube(1, (0,))
        assert ancestor(c, 3) == g.cube(0, (0,))

    def test_no_ancestor_above_top(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        with pytest.raises(ResolutionError):
            ancestor(g.cube(1, (0,)), 2)

    @given(seed=st.integers(0, 10_000), level=st.integers(1, 4), k=st.integers(0, 4))
    @settings(max_examples=60, deadline=None)
    def test_contains_on_shifted_grids(self, seed, level, k):
        mesh = Mesh(1, 1, 4)
        rng = np.random.default_rng(seed)
        g = shifted_grid(mesh, sample_shift(rng, mesh, 1))
        cube = g.cubes(level)[int(rng.integers(0, 2**level))]
        if k > level:
            with pytest.raises(ResolutionError):
                ancestor(cube, k)
            return
        anc = ancestor(cube, k)
        assert anc.side_cells == cube.side_cells * 2**k
        assert anc.contains(cube)


class TestChildren:
    def test_standard_halving(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        left, right = children(g.cube(0, (0,)))
        assert (left.offset, right.offset) == ((0,), (4,))
        left, right = children(g.cube(1, (1,)))
        assert (left.offset, right.offset) == ((4,), (6,))

    def test_wrapped_halving(self):
        # [3/4,1) u [0,1/4) splits into [3/4,1) and [0,1/4)
        mesh = Mesh(1, 1, 4)
        g = shifted_grid(mesh, bits_for(mesh, 1, {1, 2}))
        wrapped = g.cube(1, (1,))
        assert wrapped.offset == (12,) and wrapped.wraps()
        first, second = children(wrapped)
        assert (first.offset, second.offset) == ((12,), (0,))

    def test_children_partition_parent(self, rng):
        mesh = Mesh(1, 1, 4)
        g = shifted_grid(mesh, sample_shift(rng, mesh, 1))
        for level in range(mesh.level):
            for cube in g.cubes(level):
                parts = children(cube)
                assert np.array_equal(
                    sum(c.indicator() for c in parts), cube.indicator()
                )
                assert all(ancestor(c, 1) == cube for c in parts)

    def test_finest_level_has_none(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        with pytest.raises(ResolutionError):
            children(g.cube(3, (0,)))


class TestShiftCube:
    def test_scale_gate(self):
        # only scales 2^-i < l(I) move the cube: for [0,1/2) that is i >= 2
        mesh = Mesh(1, 1, 4)
        std = standard_grid(mesh, 1)
        sh = bits_for(mesh, 1, {2})
        assert shift_cube(std.cube(1, (0,)), sh).offset == (4,)
        # a scale-1 bit alone does not move level-1 cubes
        sh1 = bits_for(mesh, 1, {1})
        assert shift_cube(std.cube(1, (0,)), sh1).offset == (0,)

    def test_zero_shift_fixes(self):
        mesh = Mesh(1, 1, 3)
        std = standard_grid(mesh, 1)
        sh = bits_for(mesh, 1, set())
        for cube in std.all_cubes():
            assert shift_cube(cube, sh).offset == cube.offset

    def test_wraps_mod_one(self):
        mesh = Mesh(1, 1, 4)
        std = standard_grid(mesh, 1)
        moved = shift_cube(std.cube(1, (1,)), bits_for(mesh, 1, {2}))
        assert moved.offset == (12,) and moved.wraps()

    def test_translation_does_not_intertwine_trees(self):
        # documented behavior: the translated cube's ancestor in the shifted
        # grid need not be the translate of the standard ancestor
        mesh = Mesh(1, 1, 4)
        std = standard_grid(mesh, 1)
        sh = bits_for(mesh, 1, {2})
        I = std.cube(2, (0,))
        lhs = shift_cube(ancestor(I, 1), sh)
        rhs = ancestor(shift_cube(I, sh), 1)
        assert lhs != rhs
        assert lhs.offset == (4,) and rhs.offset == (12,)

    def test_rejects_shifted_source(self):
        mesh = Mesh(1, 1, 3)
        sh = bits_for(mesh, 1, {1})
        moved = shifted_grid(mesh, sh).cube(1, (0,))
        with pytest.raises(ValueError):
            shift_cube(moved, sh)


class TestSampleShift:
    def test_deterministic(self):
        mesh = Mesh(1, 1, 5)
        a = sample_shift(np.random.default_rng(7), mesh, 1)
        b = sample_shift(np.random.default_rng(7), mesh, 1)
        assert a == b

    def test_mean_translation(self):
        # E[sum 2^-i w_i] = (1 - 2^-L)/2; oracle = exhaustive enumeration
        mesh = Mesh(1, 1, 4)
        exact = np.mean([s.total_translation()[0] for s in enumerate_shifts(mesh, 1)])
        assert exact == pytest.approx((1 - 2.0**-mesh.level) / 2, abs=1e-15)
        rng = np.random.default_rng(123)
        draws = np.array([sample_shift(rng, mesh, 1).total_translation()[0] for _ in range(10_000)])
        var = np.mean([(s.total_translation()[0] - exact) ** 2 for s in enumerate_shifts(mesh, 1)])
        assert abs(draws.mean() - exact) < 3 * np.sqrt(var / draws.size)

    def test_smallest_resolution_support(self):
        mesh = Mesh(1, 1, 1)
        support = {s.total_translation()[0] for s in enumerate_shifts(mesh, 1)}
        assert support == {0.0, 0.5}


class TestHaarIndex:
    def test_validation(self):
        g = standard_grid(Mesh(1, 1, 3), 1)
        HaarIndex(g.cube(1, (0,)), (1,))
        HaarIndex(g.cube(3, (0,)), (0,))  # averaging factor exists at level L
        with pytest.raises(ResolutionError):
            HaarIndex(g.cube(3, (0,)), (1,))
        with pytest.raises(ValueError):
            HaarIndex(g.cube(1, (0,)), (1, 0))

    def test_pattern_code(self):
        g = standard_grid(Mesh(2, 1, 2), 1)
        h = HaarIndex(g.cube(1, (0, 1)), (0, 1))
        assert h.pattern == 2 and h.cancellative


class TestCubeIndexing:
    def test_roundtrip(self, rng):
        mesh = Mesh(1, 1, 4)
        g = shifted_grid(mesh, sample_shift(rng, mesh, 1))
        for i, cube in enumerate(g.all_cubes()):
            assert g.cube_index(cube) == i
            assert g.cube_by_index(i) == cube

    def test_roundtrip_2d(self):
        mesh = Mesh(2, 1, 2)
        g = standard_grid(mesh, 1)
        for i, cube in enumerate(g.all_cubes()):
            assert g.cube_index(cube) == i
            assert g.cube_by_index(i) == cube
