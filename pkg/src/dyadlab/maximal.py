"""Maximal functions over mesh-aligned window families on the torus.

Window families are circular (wrap-aware): this is what makes the
non-dyadic suprema dominate every shifted dyadic grid, whose cubes may
wrap mod 1.  A "group" of axes takes a common side length, so a factor
cube is one group and a bi-parameter rectangle is two groups (one per
factor).

The adapted maximal function sup_R <|b - <b>_R| |f|>_R 1_R cannot use
plain prefix sums because the integrand depends on R.  For rank-2 value
arrays it is computed exactly with per-threshold prefix stacks:

    sum_R |b - c| g = c*G<= - H<= + (H - H<=) - c*(G - G<=),

where G, H are window sums of g and b*g and <= restricts to cells with
b <= c = <b>_R.  Higher-rank arrays fall back to a direct scan.
"""
from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter1d

from .grids import FactorGrid
from .mesh import FactorFunction, GridFunction
from .signal import average_projection


# -- windowed primitives -----------------------------------------------------

def _circ_window_sum(v: np.ndarray, length: int, axis: int) -> np.ndarray:
    """Sums over circular windows [s, s+length) per start s."""
    if length == 1:
        return v
    n = v.shape[axis]
    head = np.take(v, range(length - 1), axis=axis)
    ext = np.concatenate([v, head], axis=axis)
    cs = np.cumsum(ext, axis=axis)
    lead = np.take(cs, range(length - 1, length - 1 + n), axis=axis)
    tail = np.concatenate(
        [np.zeros(np.take(v, [0], axis=axis).shape), np.take(cs, range(n - 1), axis=axis)], axis=axis
    )
    return lead - tail


def _cover_max(v: np.ndarray, length: int, axis: int) -> np.ndarray:
    """out[x] = max over starts s with x in [s, s+length) of v[s], circular."""
    if length == 1:
        return v
    filt = maximum_filter1d(v, size=length, axis=axis, mode="wrap")
    return np.roll(filt, (length - 1) // 2, axis=axis)


def _group_shapes(groups: list[tuple[int, ...]], n: int):
    """All combinations of one side length (1..n) per axis group."""
    if not groups:
        yield ()
        return
    for side in range(1, n + 1):
        for rest in _group_shapes(groups[1:], n):
            yield (side,) + rest


def sup_window_averages(values: np.ndarray, groups: list[tuple[int, ...]], n: int) -> np.ndarray:
    """sup over all windows (one common side per group) of window averages.

    ``values`` must be nonnegative; axes not in any group are batched.
    """
    out = np.zeros_like(values, dtype=float)
    for sides in _group_shapes(groups, n):
        sums = values
        cells = 1
        for side, axes in zip(sides, groups):
            for ax in axes:
                sums = _circ_window_sum(sums, side, ax)
                cells *= side
        means = sums / cells
        for side, axes in zip(sides, groups):
            for ax in axes:
                means = _cover_max(means, side, ax)
        np.maximum(out, means, out=out)
    return out


def dyadic_sup(values: np.ndarray, grid: FactorGrid, axes: tuple[int, ...]) -> np.ndarray:
    """sup over the grid's cubes (levels 0..L) of cube averages (nonneg input)."""
    from .signal import _level_average_values

    out = np.zeros_like(values, dtype=float)
    for level in range(grid.mesh.level + 1):
        np.maximum(out, _level_average_values(values, grid, level, axes), out=out)
    return out


# -- adapted windows ---------------------------------------------------------

def _wrapped_box_segments(start: np.ndarray, length: int, n: int):
    """Split circular window [start, start+length) into <= 2 linear segments."""
    hi = np.minimum(start + length, n)
    seg1 = (start, hi)
    over = np.maximum(start + length - n, 0)
    seg2 = (np.zeros_like(start), over)
    return [seg1, seg2]


def _adapted_rank2(b: np.ndarray, g: np.ndarray, groups, want_function: bool):
    """Exact adapted suprema for a rank-2 array via threshold prefix stacks."""
    n1, n2 = b.shape
    uvals = np.unique(b.ravel())
    t = len(uvals)
    mask = b[None, :, :] <= uvals[:, None, None]
    stack_g = np.zeros((t, n1 + 1, n2 + 1))
    stack_g[:, 1:, 1:] = (mask * g).cumsum(axis=1).cumsum(axis=2)
    stack_h = np.zeros((t, n1 + 1, n2 + 1))
    stack_h[:, 1:, 1:] = (mask * (b * g)).cumsum(axis=1).cumsum(axis=2)
    del mask
    pg = stack_g[-1]
    ph = stack_h[-1]
    flat_g = stack_g.reshape(t, -1)
    flat_h = stack_h.reshape(t, -1)

    s1 = np.arange(n1)[:, None]
    s2 = np.arange(n2)[None, :]
    sup_val = 0.0
    fun = np.zeros((n1, n2)) if want_function else None

    def boxsum(flat, prefix, tidx, l1, l2):
        """Window sums of the stacked quantity at per-position thresholds."""
        tot_le = np.zeros((n1, n2))
        tot = np.zeros((n1, n2))
        for a0, a1 in _wrapped_box_segments(s1, l1, n1):
            for b0, b1 in _wrapped_box_segments(s2, l2, n2):
                for sa, ca in ((1, a1), (-1, a0)):
                    for sb, cb in ((1, b1), (-1, b0)):
                        lin = ca * (n2 + 1) + cb
                        tot_le += sa * sb * flat[tidx, lin]
                        tot += sa * sb * prefix.ravel()[lin]
        return tot_le, tot

    # shapes: group axes share a side; rank-2 groups are subsets of (0, 1)
    for sides in _group_shapes(groups, max(n1, n2)):
        l1 = l2 = 1
        for side, axes in zip(sides, groups):
            if 0 in axes:
                l1 = side
            if 1 in axes:
                l2 = side
        if l1 > n1 or l2 > n2:
            continue
        cells = l1 * l2
        c = _circ_window_sum(_circ_window_sum(b, l1, 0), l2, 1) / cells
        tidx = np.searchsorted(uvals, c, side="right") - 1
        np.clip(tidx, 0, t - 1, out=tidx)
        g_le, g_tot = boxsum(flat_g, pg, tidx, l1, l2)
        h_le, h_tot = boxsum(flat_h, ph, tidx, l1, l2)
        window = c * g_le - h_le + (h_tot - h_le) - c * (g_tot - g_le)
        means = window / cells
        sup_val = max(sup_val, float(means.max()))
        if want_function:
            cover = _cover_max(_cover_max(means, l1, 0), l2, 1)
            np.maximum(fun, cover, out=fun)
    return sup_val, fun


def _adapted_generic(b: np.ndarray, g: np.ndarray, groups, n: int, want_function: bool):
    """Direct scan over window offsets; exact but slow, any rank."""
    sup_val = 0.0
    fun = np.zeros_like(b, dtype=float) if want_function else None
    for sides in _group_shapes(groups, n):
        sums_b = b
        cells = 1
        for side, axes in zip(sides, groups):
            for ax in axes:
                sums_b = _circ_window_sum(sums_b, side, ax)
                cells *= side
        c = sums_b / cells
        acc = np.zeros_like(b, dtype=float)
        offsets = [()]
        for side, axes in zip(sides, groups):
            for ax in axes:
                offsets = [o + (k,) for o in offsets for k in range(side)]
        axis_order = [ax for side, axes in zip(sides, groups) for ax in axes]
        all_axes = tuple(range(b.ndim))
        for off in offsets:
            shift = [0] * b.ndim
            for ax, k in zip(axis_order, off):
                shift[ax] = -k
            acc += np.abs(np.roll(b, shift, axis=all_axes) - c) * np.roll(g, shift, axis=all_axes)
        means = acc / cells
        sup_val = max(sup_val, float(means.max()))
        if want_function:
            cover = means
            for side, axes in zip(sides, groups):
                for ax in axes:
                    cover = _cover_max(cover, side, ax)
            np.maximum(fun, cover, out=fun)
    return sup_val, fun


def _window_cells(starts1, starts2, l1, l2, n1, n2):
    i1 = (starts1[:, None] + np.arange(l1)[None, :]) % n1
    i2 = (starts2[:, None] + np.arange(l2)[None, :]) % n2
    return i1, i2


def deviation_sup_rank2(b: np.ndarray, g: np.ndarray | None = None) -> float:
    """sup over all rectangles of <|b - <b>_R| g>_R, exact, sup only.

    Prunes with Cauchy-Schwarz: the window value is at most
    std_R(b) * sqrt(<g^2>_R), which needs only plain window sums; only
    windows whose bound reaches the best exactly-evaluated value so far
    are evaluated cellwise.
    """
    b = np.asarray(b, dtype=float)
    n1, n2 = b.shape
    gg = None if g is None else np.asarray(g, dtype=float) ** 2
    babs = np.abs(g) if g is not None else None

    def exact(l1, l2, starts1, starts2, c):
        i1, i2 = _window_cells(starts1, starts2, l1, l2, n1, n2)
        cells = b[i1[:, :, None], i2[:, None, :]]
        dev = np.abs(cells - c[:, None, None])
        if babs is not None:
            dev = dev * babs[i1[:, :, None], i2[:, None, :]]
        return dev.mean(axis=(1, 2))

    shape_data = []
    best = 0.0
    for l1 in range(1, n1 + 1):
        sb = _circ_window_sum(b, l1, 0)
        sb2 = _circ_window_sum(b * b, l1, 0)
        sg = None if gg is None else _circ_window_sum(gg, l1, 0)
        for l2 in range(1, n2 + 1):
            cells = l1 * l2
            c = _circ_window_sum(sb, l2, 1) / cells
            q = _circ_window_sum(sb2, l2, 1) / cells - c * c
            np.clip(q, 0.0, None, out=q)
            bound = np.sqrt(q)
            if gg is not None:
                bound = bound * np.sqrt(_circ_window_sum(sg, l2, 1) / cells)
            shape_data.append((l1, l2, c, bound))
            flat = int(np.argmax(bound))
            s1, s2 = np.array([flat // n2]), np.array([flat % n2])
            val = exact(l1, l2, s1, s2, c.ravel()[flat : flat + 1])[0]
            best = max(best, float(val))

    slack = 1.0 - 1e-9
    for l1, l2, c, bound in shape_data:
        mask = bound >= best * slack
        if not mask.any():
            continue
        s1, s2 = np.nonzero(mask)
        vals = exact(l1, l2, s1, s2, c[mask])
        if vals.size:
            best = max(best, float(vals.max()))
    return best


def adapted_sup(
    b: np.ndarray, g: np.ndarray, groups: list[tuple[int, ...]], n: int, want_function: bool = True
):
    """sup over windows of <|b - <b>_W| g>_W (and optionally its 1_W-cover)."""
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    if b.ndim == 2 and all(len(ax) == 1 for ax in groups):
        return _adapted_rank2(b, g, groups, want_function)
    if b.ndim == 1:
        s, f = _adapted_rank2(b[:, None], g[:, None], [(0,)], want_function)
        return s, (f[:, 0] if want_function else None)
    return _adapted_generic(b, g, groups, n, want_function)


# -- public operators --------------------------------------------------------

def maximal(f, mode: str = "nondyadic", grid: FactorGrid | None = None,
            grids: tuple[FactorGrid, FactorGrid] | None = None, axis: int | None = None):
    """Pointwise supremum of |f|-averages over a window family.

    modes, for a GridFunction f:
      nondyadic      all mesh-aligned rectangles (axis=1/2 restricts to a
                     partial maximal in that factor variable only)
      dyadic         cubes of ``grid`` acting in the grid's factor variable
      strong-dyadic  rectangles of the pair ``grids``
    For a FactorFunction f, nondyadic/dyadic act on its own factor.
    """
    absvals = np.abs(f.values)
    mesh = f.mesh
    if isinstance(f, FactorFunction):
        axes = tuple(range(absvals.ndim))
        if mode == "nondyadic":
            return FactorFunction(mesh, f.axis, sup_window_averages(absvals, [axes], mesh.cells))
        if mode == "dyadic":
            if grid is None or grid.axis != f.axis:
                raise ValueError("dyadic mode needs a grid on the function's factor")
            return FactorFunction(mesh, f.axis, dyadic_sup(absvals, grid, axes))
        raise ValueError(f"unknown mode {mode!r} for a factor function")
    if not isinstance(f, GridFunction):
        raise TypeError("maximal wants a GridFunction or FactorFunction")
    if mode == "nondyadic":
        if axis is None:
            groups = [mesh.factor_axes(1), mesh.factor_axes(2)]
        else:
            groups = [mesh.factor_axes(axis)]
        return GridFunction(mesh, sup_window_averages(absvals, groups, mesh.cells))
    if mode == "dyadic":
        if grid is None:
            raise ValueError("dyadic mode needs a grid")
        return GridFunction(mesh, dyadic_sup(absvals, grid, mesh.factor_axes(grid.axis)))
    if mode == "strong-dyadic":
        if grids is None:
            raise ValueError("strong-dyadic mode needs a grid pair")
        g1, g2 = grids
        out = np.zeros(mesh.shape)
        for j1 in range(mesh.level + 1):
            row = average_projection(GridFunction(mesh, absvals), g1, j1).values
            for j2 in range(mesh.level + 1):
                np.maximum(out, average_projection(GridFunction(mesh, row), g2, j2).values, out=out)
        return GridFunction(mesh, out)
    raise ValueError(f"unknown mode {mode!r}")


def adapted_maximal(b, f, want_sup: bool = False):
    """M_b f = sup_W <|b - <b>_W| |f|>_W 1_W over non-dyadic windows.

    One-parameter for FactorFunctions (windows are factor cubes),
    bi-parameter for GridFunctions (windows are rectangles).
    """
    if isinstance(b, FactorFunction) and isinstance(f, FactorFunction):
        if b.mesh != f.mesh or b.axis != f.axis:
            raise ValueError("adapted maximal needs b and f on the same factor")
        axes = tuple(range(b.values.ndim))
        sup, fun = adapted_sup(b.values.real, np.abs(f.values), [axes], b.mesh.cells)
        out = FactorFunction(b.mesh, b.axis, fun)
    elif isinstance(b, GridFunction) and isinstance(f, GridFunction):
        if b.mesh != f.mesh:
            raise ValueError("adapted maximal needs b and f on the same mesh")
        mesh = b.mesh
        groups = [mesh.factor_axes(1), mesh.factor_axes(2)]
        sup, fun = adapted_sup(b.values.real, np.abs(f.values), groups, mesh.cells)
        out = GridFunction(mesh, fun)
    else:
        raise TypeError("adapted_maximal wants two GridFunctions or two FactorFunctions")
    return (out, sup) if want_sup else out
