"""Pairings and the one- and bi-parameter martingale difference calculus.

Everything here is an exact finite sum over mesh cells.  The expensive
paths are expressed through per-grid Haar analysis matrices: for a factor
grid the matrix ``H[p]`` holds the values of every L^2-normalized Haar
function ``h_I^p`` (pattern p over the factor coordinates, 0 = averaging,
1 = oscillating) on every factor cell, so coefficient tables over all
cube pairs are matrix sandwiches.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grids import DyadicCube, DyadicRectangle, FactorGrid, HaarIndex
from .mesh import FactorFunction, GridFunction, MeshMismatchError, ResolutionError


# -- Haar profiles -----------------------------------------------------------

@lru_cache(maxsize=256)
def factor_profiles(grid: FactorGrid) -> np.ndarray:
    """Values of h^p_I on factor cells: array (2^d, cube_count, cells^d).

    Oscillating patterns at the finest level have no Haar function in the
    truncated grid; their rows are identically zero.
    """
    mesh = grid.mesh
    d, N, L = grid.dim, mesh.cells, mesh.level
    coord = {}  # (level, eta_bit) -> (tiles, N) profile per coordinate
    for j in range(L + 1):
        side = 1 << (L - j)
        scale = 2.0 ** (j / 2.0)
        for c in range(d):
            t = grid.translation(j)[c]
            cols = ((np.arange(N) + t) % N).reshape(1 << j, side)
            p0 = np.zeros((1 << j, N))
            np.put_along_axis(p0, cols, scale, axis=1)
            p1 = np.zeros((1 << j, N))
            if side > 1:
                sign = np.where(np.arange(side) < side // 2, scale, -scale)
                np.put_along_axis(p1, cols, np.broadcast_to(sign, cols.shape), axis=1)
            coord[(j, 0, c)] = p0
            coord[(j, 1, c)] = p1
    out = np.zeros((1 << d, grid.cube_count(), N**d))
    base = 0
    for j in range(L + 1):
        rows = 1 << (j * d)
        for pat in range(1 << d):
            block = None
            for c in range(d):
                e = (pat >> c) & 1
                piece = coord[(j, e, c)]
                block = piece if block is None else np.kron(block, piece)
            out[pat, base : base + rows] = block
        base += rows
    out.flags.writeable = False
    return out


def cube_volumes(grid: FactorGrid) -> np.ndarray:
    """|I| for every cube in flat-index order."""
    parts = [np.full(1 << (j * grid.dim), 2.0 ** (-j * grid.dim)) for j in range(grid.mesh.level + 1)]
    return np.concatenate(parts)


def cube_levels(grid: FactorGrid) -> np.ndarray:
    parts = [np.full(1 << (j * grid.dim), j, dtype=int) for j in range(grid.mesh.level + 1)]
    return np.concatenate(parts)


def haar_values(h: HaarIndex) -> FactorFunction:
    grid = h.cube.grid
    row = factor_profiles(grid)[h.pattern, grid.cube_index(h.cube)]
    return FactorFunction(grid.mesh, grid.axis, row.reshape(grid.mesh.factor_shape(grid.axis)))


# -- pairings ----------------------------------------------------------------

def pair(f, g):
    """Exact integral of f*g over the torus (no conjugation)."""
    if isinstance(f, FactorFunction) and isinstance(g, FactorFunction):
        if f.mesh != g.mesh or f.axis != g.axis:
            raise MeshMismatchError("pairing needs functions on the same factor")
        return (f.values * g.values).sum() * f.mesh.factor_cell_volume(f.axis)
    if isinstance(f, GridFunction) and isinstance(g, GridFunction):
        if f.mesh != g.mesh:
            raise MeshMismatchError("pairing needs functions on the same mesh")
        return (f.values * g.values).sum() * f.mesh.cell_volume
    raise TypeError("pair wants two GridFunctions or two FactorFunctions")


def haar_pair(f: GridFunction, hx: HaarIndex, hy: HaarIndex):
    """<f, h_I^eta ⊗ h_J^theta> for cubes on the two factors."""
    if hx.cube.grid.axis != 1 or hy.cube.grid.axis != 2:
        raise ValueError("haar_pair wants an axis-1 index then an axis-2 index")
    if hx.cube.grid.mesh != f.mesh or hy.cube.grid.mesh != f.mesh:
        raise MeshMismatchError("Haar indices are not aligned to the function's mesh")
    hxv = haar_values(hx).broadcast()
    hyv = haar_values(hy).broadcast()
    return (f.values * hxv * hyv).sum() * f.mesh.cell_volume


def partial_pair(f: GridFunction, h: HaarIndex) -> FactorFunction:
    """<f, h>_axis as a function of the other factor variable."""
    grid = h.cube.grid
    if grid.mesh != f.mesh:
        raise MeshMismatchError("Haar index is not aligned to the function's mesh")
    axis = grid.axis
    hv = haar_values(h).broadcast()
    summed = (f.values * hv).sum(axis=f.mesh.factor_axes(axis))
    other = 2 if axis == 1 else 1
    return FactorFunction(f.mesh, other, summed * f.mesh.factor_cell_volume(axis))


def cube_average(f, target):
    """<f>_R for a rectangle; <f>_{I,axis} as a FactorFunction for a cube."""
    if isinstance(target, DyadicRectangle):
        if not isinstance(f, GridFunction):
            raise TypeError("rectangle averages need a GridFunction")
        idx = target.first.coord_cells() + target.second.coord_cells()
        return f.values[np.ix_(*idx)].mean()
    if isinstance(target, DyadicCube):
        if isinstance(f, FactorFunction):
            if target.grid.axis != f.axis:
                raise ValueError("cube axis does not match the factor function")
            return f.values[np.ix_(*target.coord_cells())].mean()
        axis = target.grid.axis
        take = f.values
        for pos, cells in zip(f.mesh.factor_axes(axis), target.coord_cells()):
            take = np.take(take, cells, axis=pos)
        mean = take.mean(axis=f.mesh.factor_axes(axis))
        return FactorFunction(f.mesh, 2 if axis == 1 else 1, mean)
    raise TypeError("target must be a DyadicCube or DyadicRectangle")


# -- level projections -------------------------------------------------------

def _tile_average(vals: np.ndarray, axes: tuple[int, ...], side: int) -> np.ndarray:
    if side == 1:
        return vals
    shape, new, mean_axes, pos = vals.shape, [], [], 0
    for i, s in enumerate(shape):
        if i in axes:
            new += [s // side, side]
            mean_axes.append(pos + 1)
            pos += 2
        else:
            new.append(s)
            pos += 1
    r = vals.reshape(new)
    mean = r.mean(axis=tuple(mean_axes), keepdims=True)
    return np.broadcast_to(mean, r.shape).reshape(shape)


def _level_average_values(vals: np.ndarray, grid: FactorGrid, level: int, axes: tuple[int, ...]) -> np.ndarray:
    t = grid.translation(level)
    side = 1 << (grid.mesh.level - level)
    rolled = np.roll(vals, tuple(-tc for tc in t), axis=axes)
    avg = _tile_average(rolled, axes, side)
    return np.roll(avg, t, axis=axes)


def average_projection(f, grid: FactorGrid, level: int):
    """Conditional expectation onto the grid's level-j tiling (per factor)."""
    if not 0 <= level <= grid.mesh.level:
        raise ResolutionError(f"level {level} outside 0..{grid.mesh.level}")
    if isinstance(f, FactorFunction):
        if f.axis != grid.axis:
            raise ValueError("grid axis does not match the factor function")
        axes = tuple(range(f.values.ndim))
        return FactorFunction(f.mesh, f.axis, _level_average_values(f.values, grid, level, axes))
    axes = f.mesh.factor_axes(grid.axis)
    return GridFunction(f.mesh, _level_average_values(f.values, grid, level, axes))


def delta_projection(f, grid: FactorGrid, level: int):
    """Sum of all martingale differences of the grid at one level."""
    if level >= grid.mesh.level:
        raise ResolutionError("no martingale difference at the finest level")
    return average_projection(f, grid, level + 1) - average_projection(f, grid, level)


# -- martingale differences and blocks ---------------------------------------

def _masked(projected, cube: DyadicCube):
    ind = cube.indicator()
    if isinstance(projected, FactorFunction):
        return FactorFunction(projected.mesh, projected.axis, projected.values * ind)
    d1 = projected.mesh.factor_dim(1)
    shape = ind.shape + (1,) * (projected.values.ndim - ind.ndim) if cube.grid.axis == 1 else (1,) * d1 + ind.shape
    return GridFunction(projected.mesh, projected.values * ind.reshape(shape))


def martingale_difference(f, target, mode: str = "delta"):
    """Delta_I / E_I projections (one-parameter, partial, or bi-parameter).

    ``target`` is a DyadicCube (acting along its own factor; one-parameter
    if ``f`` is a FactorFunction) or a DyadicRectangle for Delta_{I x J}
    and E_{I x J}.
    """
    if mode not in ("delta", "average"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(target, DyadicRectangle):
        part = martingale_difference(f, target.first, mode)
        return martingale_difference(part, target.second, mode)
    cube = target
    grid = cube.grid
    if isinstance(f, FactorFunction) and f.axis != grid.axis:
        raise ValueError("cube axis does not match the factor function")
    if mode == "average":
        return _masked(average_projection(f, grid, cube.level), cube)
    if cube.level >= grid.mesh.level:
        raise ResolutionError("no martingale difference at the finest level")
    return _masked(delta_projection(f, grid, cube.level), cube)


def martingale_block(f, K: DyadicCube, depth: int, V: DyadicCube | None = None, depth2: int | None = None):
    """Delta_{K,i} f (one-parameter) or the bi-parameter block Delta^{i,j}_{K x V} f."""
    if depth < 0 or (depth2 is not None and depth2 < 0):
        raise ValueError("block depths must be nonnegative")
    if V is not None:
        if depth2 is None:
            raise ValueError("a second depth is required with a second cube")
        part = martingale_block(f, K, depth)
        return martingale_block(part, V, depth2)
    level = K.level + depth
    if level + 1 > K.grid.mesh.level:
        raise ResolutionError(f"block depth {depth} below level {K.level} exceeds the resolution")
    return _masked(delta_projection(f, K.grid, level), K)


# -- coefficient tables ------------------------------------------------------

def _matrix_form(f: GridFunction) -> np.ndarray:
    n1 = f.mesh.factor_cells(1)
    return f.values.reshape(n1, f.mesh.factor_cells(2))


def pair_tables(f: GridFunction, grid1: FactorGrid, grid2: FactorGrid) -> np.ndarray:
    """T[p1, p2, i, j] = <f, h^{p1}_I ⊗ h^{p2}_J> over all cube pairs."""
    if grid1.axis != 1 or grid2.axis != 2:
        raise ValueError("pair_tables wants an axis-1 grid then an axis-2 grid")
    H1 = factor_profiles(grid1)
    H2 = factor_profiles(grid2)
    F = _matrix_form(f) * f.mesh.cell_volume
    return np.einsum("pac,cd,qbd->pqab", H1, F, H2, optimize=True)


def partial_coeff_table(f: GridFunction, grid: FactorGrid) -> np.ndarray:
    """C[p, i, cell] = <f, h^p_I>_axis evaluated on the other factor's cells."""
    H = factor_profiles(grid)
    F = _matrix_form(f)
    vol = f.mesh.factor_cell_volume(grid.axis)
    if grid.axis == 1:
        return np.einsum("pac,cd->pad", H, F) * vol
    return np.einsum("pbd,cd->pbc", H, F) * vol


def partial_average_table(f: GridFunction, grid: FactorGrid) -> np.ndarray:
    """A[i, cell] = <f>_{I,axis} on the other factor's cells."""
    c0 = partial_coeff_table(f, grid)[0]
    return c0 / np.sqrt(cube_volumes(grid))[:, None]


def rect_average_table(f: GridFunction, grid1: FactorGrid, grid2: FactorGrid) -> np.ndarray:
    """A[i, j] = <f>_{I x J} over all cube pairs."""
    t00 = pair_tables(f, grid1, grid2)[0, 0]
    w1 = np.sqrt(cube_volumes(grid1))
    w2 = np.sqrt(cube_volumes(grid2))
    return t00 / np.outer(w1, w2)


def synthesize(coeff: np.ndarray, grid1: FactorGrid, p1: int, grid2: FactorGrid, p2: int) -> GridFunction:
    """sum_{I,J} coeff[I,J] h^{p1}_I ⊗ h^{p2}_J as a GridFunction."""
    H1 = factor_profiles(grid1)[p1]
    H2 = factor_profiles(grid2)[p2]
    vals = H1.T @ coeff @ H2
    return GridFunction(grid1.mesh, vals.reshape(grid1.mesh.shape))


def synthesize_factor(coeff: np.ndarray, grid: FactorGrid, pattern: int) -> FactorFunction:
    """sum_I coeff[I] h^pattern_I on one factor."""
    H = factor_profiles(grid)[pattern]
    return FactorFunction(grid.mesh, grid.axis, (coeff @ H).reshape(grid.mesh.factor_shape(grid.axis)))
