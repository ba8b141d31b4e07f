"""Square functions, coefficient-maximal transforms, and the auxiliary
operators driving the weak-type experiments.

The shifted square function pins coefficients to translated cubes but
indicator weights to the standard positions,

    S~_w g = ( sum_V |<g, h_{V+w}>|^2 1_V / |V| )^(1/2),

which is well defined cellwise because translating a cube preserves its
tile index within its own grid.  The four auxiliary operators combine a
coefficient transform, a shifted square function or martingale block, and
a non-dyadic partial maximal, averaged over sampled translations.
"""
from __future__ import annotations

import numpy as np

from .grids import FactorGrid, GridShift, shift_cube, shifted_grid, standard_grid
from .maximal import adapted_sup, maximal, sup_window_averages
from .mesh import FactorFunction, GridFunction, Mesh
from .samplers import ShiftSampler
from .signal import (
    cube_levels,
    cube_volumes,
    delta_projection,
    factor_profiles,
    partial_average_table,
    partial_coeff_table,
)


def expand_cube_weights(w: np.ndarray, mesh: Mesh, axis: int, inverse_volume: bool = True) -> np.ndarray:
    """sum_V w[V] * 1_V(x) (/|V|) over standard-position cubes of one factor.

    ``w`` has the flat cube index first; trailing axes are carried along.
    Output shape: factor_shape(axis) + w.shape[1:].
    """
    d = mesh.factor_dim(axis)
    side_total = mesh.cells
    rest = w.shape[1:]
    out = np.zeros(mesh.factor_shape(axis) + rest)
    base = 0
    for j in range(mesh.level + 1):
        tiles = 1 << (j * d)
        block = w[base : base + tiles].reshape((1 << j,) * d + rest)
        if inverse_volume:
            block = block * (2.0 ** (j * d))
        side = side_total >> j
        for ax in range(d):
            block = np.repeat(block, side, axis=ax)
        out += block
        base += tiles
    return out


def _cancellative_codes(d: int) -> list[int]:
    return list(range(1, 1 << d))


def square_function(
    f,
    mode: str,
    grids: tuple[FactorGrid, FactorGrid] | None = None,
    grid: FactorGrid | None = None,
    shift: GridShift | None = None,
):
    """Pointwise l2 aggregate of martingale pieces.

    modes: 'bipar' (grid pair), 'par1'/'par2' (one grid), 'tilde'
    (FactorFunction, shifted coefficients), 'tilde2' (GridFunction,
    shifted coefficients in the shift's factor).
    """
    if mode == "bipar":
        g1, g2 = grids
        acc = np.zeros(f.mesh.shape)
        for j1 in range(f.mesh.level):
            d1 = delta_projection(f, g1, j1)
            for j2 in range(f.mesh.level):
                acc += np.abs(delta_projection(d1, g2, j2).values) ** 2
        return GridFunction(f.mesh, np.sqrt(acc))
    if mode in ("par1", "par2"):
        if grid is None:
            raise ValueError(f"mode {mode!r} needs a grid")
        acc = np.zeros(f.mesh.shape)
        for j in range(f.mesh.level):
            acc += np.abs(delta_projection(f, grid, j).values) ** 2
        return GridFunction(f.mesh, np.sqrt(acc))
    if mode == "tilde":
        if not isinstance(f, FactorFunction) or shift is None:
            raise ValueError("tilde mode wants a FactorFunction and a shift")
        g = shifted_grid(f.mesh, shift)
        if g.axis != f.axis:
            raise ValueError("shift axis does not match the function")
        h = factor_profiles(g)
        fvol = f.mesh.factor_cell_volume(f.axis)
        flat = f.values.reshape(-1)
        w = np.zeros(g.cube_count())
        for pat in _cancellative_codes(g.dim):
            w += np.abs(h[pat] @ flat * fvol) ** 2
        return FactorFunction(f.mesh, f.axis, np.sqrt(expand_cube_weights(w, f.mesh, f.axis)))
    if mode == "tilde2":
        if not isinstance(f, GridFunction) or shift is None:
            raise ValueError("tilde2 mode wants a GridFunction and a shift")
        g = shifted_grid(f.mesh, shift)
        coeffs = partial_coeff_table(f, g)
        w = np.zeros(coeffs.shape[1:])
        for pat in _cancellative_codes(g.dim):
            w += np.abs(coeffs[pat]) ** 2
        expanded = expand_cube_weights(w, f.mesh, g.axis)
        # axes: factor(g.axis) then the other factor's cells
        other = 3 - g.axis
        vals = expanded.reshape(f.mesh.factor_shape(g.axis) + f.mesh.factor_shape(other))
        if g.axis == 1:
            return GridFunction(f.mesh, np.sqrt(vals))
        d2 = f.mesh.factor_dim(2)
        order = tuple(range(d2, d2 + f.mesh.factor_dim(1))) + tuple(range(d2))
        return GridFunction(f.mesh, np.sqrt(np.transpose(vals, order)))
    raise ValueError(f"unknown square function mode {mode!r}")


def _batched_factor_maximal(rows: np.ndarray, mesh: Mesh, axis: int) -> np.ndarray:
    """Non-dyadic factor maximal applied to each row (rows: (batch, cells^d))."""
    d = mesh.factor_dim(axis)
    arr = np.abs(rows).reshape((-1,) + mesh.factor_shape(axis))
    group = tuple(range(1, 1 + d))
    out = sup_window_averages(arr, [group], mesh.cells)
    return out.reshape(rows.shape)


def _synthesize_rows(rows: np.ndarray, grid: FactorGrid, pattern: int) -> np.ndarray:
    """sum_I h^pattern_I(x_axis) rows[I](x_other) as a full mesh array."""
    h = factor_profiles(grid)[pattern]
    vals = h.T @ rows  # (cells_axis, cells_other)
    mesh = grid.mesh
    other = 3 - grid.axis
    full = vals.reshape(mesh.factor_shape(grid.axis) + mesh.factor_shape(other))
    if grid.axis == 1:
        return full
    d2 = mesh.factor_dim(2)
    order = tuple(range(d2, d2 + mesh.factor_dim(1))) + tuple(range(d2))
    return np.transpose(full, order)


def phi_sharp(f: GridFunction, grid: FactorGrid) -> GridFunction:
    """sum_I h_I ⊗ M<f, h_I> with the non-dyadic maximal in the other factor."""
    coeffs = partial_coeff_table(f, grid)
    acc = np.zeros(f.mesh.shape)
    for pat in _cancellative_codes(grid.dim):
        maxed = _batched_factor_maximal(coeffs[pat], f.mesh, 3 - grid.axis)
        acc = acc + _synthesize_rows(maxed, grid, pat)
    return GridFunction(f.mesh, acc)


def adapted_coefficient_rows(b: GridFunction, f: GridFunction, grid: FactorGrid) -> np.ndarray:
    """rows[pat, I] = M_{<b>_{I,axis}} <f, h^pat_I>_axis on the other factor's cells."""
    mesh = f.mesh
    other = 3 - grid.axis
    d = mesh.factor_dim(other)
    symbols = partial_average_table(b, grid)
    coeffs = partial_coeff_table(f, grid)
    levels = cube_levels(grid)
    out = np.zeros_like(coeffs)
    fshape = mesh.factor_shape(other)
    group = [tuple(range(d))]
    for idx in range(grid.cube_count()):
        if levels[idx] >= mesh.level:
            continue
        sym = symbols[idx].reshape(fshape)
        for pat in _cancellative_codes(grid.dim):
            row = coeffs[pat, idx]
            if not row.any():
                continue
            _, fun = adapted_sup(sym, np.abs(row).reshape(fshape), group, mesh.cells)
            out[pat, idx] = fun.reshape(-1)
    return out


def phi_adapted(b: GridFunction, f: GridFunction, grid: FactorGrid) -> GridFunction:
    """sum_J M_{<b>_{J,axis}} <f, h_J> ⊗ h_J (adapted maximal is non-dyadic)."""
    rows = adapted_coefficient_rows(b, f, grid)
    acc = np.zeros(f.mesh.shape)
    for pat in _cancellative_codes(grid.dim):
        acc = acc + _synthesize_rows(rows[pat], grid, pat)
    return GridFunction(f.mesh, acc)


def aux_phi(
    f: GridFunction,
    kind: str,
    b: GridFunction | None = None,
    depth: int | None = None,
    variant: int | None = None,
    sampler: ShiftSampler | None = None,
) -> GridFunction:
    """The four averaged auxiliary operators.

    kind 'partial1':  E_w2[ M^1 S~^2_w2 (phi^2_{w2,b} f) ]            (needs b)
    kind 'partial2':  ( sum_K E_w1 (M^1 Delta^1_{K+w1,depth} phi^1_w1 f)^2 )^(1/2)
    kind 'full1':     E_w2 ( sum_V (M <f,h_{V+w2}>_2)^2 1_V/|V| )^(1/2)
    kind 'full2':     E_w1 ( sum_K 1_K/|K| (M <a^1_variant(b,f), h_{K+w1}>_1)^2 )^(1/2)
    """
    if sampler is None:
        raise ValueError("aux_phi needs a shift sampler")
    mesh = f.mesh
    if kind == "partial1":
        if b is None or sampler.axis != 2:
            raise ValueError("partial1 needs the symbol b and an axis-2 sampler")
        shifts = sampler.shifts()
        acc = np.zeros(mesh.shape)
        for sh in shifts:
            g2 = shifted_grid(mesh, sh)
            rows = adapted_coefficient_rows(b, f, g2)
            w = (rows**2).sum(axis=0)
            sq = np.sqrt(_arrange_axis2_expansion(w, mesh))
            acc += maximal(GridFunction(mesh, sq), "nondyadic", axis=1).values
        return GridFunction(mesh, acc / len(shifts))
    if kind == "partial2":
        if depth is None or depth < 0 or sampler.axis != 1:
            raise ValueError("partial2 needs a block depth >= 0 and an axis-1 sampler")
        shifts = sampler.shifts()
        std = standard_grid(mesh, 1)
        acc = np.zeros(mesh.shape)
        for sh in shifts:
            g1 = shifted_grid(mesh, sh)
            ph = phi_sharp(f, g1)
            for level in range(mesh.level - depth):
                dl = delta_projection(ph, g1, level + depth).values
                stack = []
                for K in std.cubes(level):
                    ind = shift_cube(K, sh).indicator()
                    shape = ind.shape + (1,) * (dl.ndim - ind.ndim)
                    stack.append(dl * ind.reshape(shape))
                blocks = np.abs(np.stack(stack))
                group = tuple(1 + ax for ax in mesh.factor_axes(1))
                maxed = sup_window_averages(blocks, [group], mesh.cells)
                acc += (maxed**2).sum(axis=0)
        return GridFunction(mesh, np.sqrt(acc / len(shifts)))
    if kind == "full1":
        if sampler.axis != 2:
            raise ValueError("full1 needs an axis-2 sampler")
        shifts = sampler.shifts()
        acc = np.zeros(mesh.shape)
        for sh in shifts:
            g2 = shifted_grid(mesh, sh)
            coeffs = partial_coeff_table(f, g2)
            w = np.zeros(coeffs.shape[1:])
            for pat in _cancellative_codes(g2.dim):
                w += _batched_factor_maximal(coeffs[pat], mesh, 1) ** 2
            acc += np.sqrt(_arrange_axis2_expansion(w, mesh))
        return GridFunction(mesh, acc / len(shifts))
    if kind == "full2":
        if b is None or variant not in (1, 2) or sampler.axis != 1:
            raise ValueError("full2 needs b, variant in {1,2}, and an axis-1 sampler")
        from .paraproducts import oneparameter_paraproduct

        shifts = sampler.shifts()
        acc = np.zeros(mesh.shape)
        for sh in shifts:
            g1 = shifted_grid(mesh, sh)
            af = oneparameter_paraproduct(variant, 1, b, f, g1)
            coeffs = partial_coeff_table(af, g1)
            w = np.zeros(coeffs.shape[1:])
            for pat in _cancellative_codes(g1.dim):
                w += _batched_factor_maximal(coeffs[pat], mesh, 2) ** 2
            expanded = expand_cube_weights(w, mesh, 1)
            acc += np.sqrt(expanded.reshape(mesh.shape))
        return GridFunction(mesh, acc / len(shifts))
    raise ValueError(f"unknown aux_phi kind {kind!r}")


def _arrange_axis2_expansion(w: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Expand axis-2 cube weights (cube, cells1) to full mesh order."""
    expanded = expand_cube_weights(w, mesh, 2)  # (factor2..., cells1)
    d2 = mesh.factor_dim(2)
    vals = expanded.reshape(mesh.factor_shape(2) + mesh.factor_shape(1))
    order = tuple(range(d2, d2 + mesh.factor_dim(1))) + tuple(range(d2))
    return np.transpose(vals, order)
