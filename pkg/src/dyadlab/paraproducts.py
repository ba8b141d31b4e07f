"""Bi-parameter and one-parameter paraproducts and product expansions.

The eight bi-parameter paraproducts pair a martingale piece of the symbol
b against a complementary piece of f, summed over all cube pairs of a
grid pair.  Indices follow the fixed catalogue (D = oscillating part at a
scale, E = averaging part; superscript = factor):

    1: D1D2 b * D1D2 f     2: D1D2 b * E1D2 f
    3: D1D2 b * D1E2 f     4: D1D2 b * E1E2 f
    5: E1D2 b * D1D2 f     6: E1D2 b * D1E2 f
    7: D1E2 b * D1D2 f     8: D1E2 b * E1D2 f

Because same-scale pieces tile the torus, the sum over cubes at a fixed
scale pair is the pointwise product of whole-grid projections, so each
paraproduct costs O(level^2) projection passes.

A product b*f paired against a rectangle's Haar data expands into
paraproduct pairings plus localized average terms; the three expansion
modes (both factors oscillating / one / none) are exact identities on the
truncated grids and are verified as such.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import DyadicRectangle, FactorGrid, HaarIndex, cancellative_patterns
from .mesh import GridFunction
from .signal import (
    average_projection,
    cube_average,
    cube_volumes,
    delta_projection,
    haar_pair,
    pair,
    pair_tables,
    partial_average_table,
    partial_coeff_table,
    rect_average_table,
)

_BIPAR_FORMS = {
    1: ("dd", "dd"),
    2: ("dd", "ed"),
    3: ("dd", "de"),
    4: ("dd", "ee"),
    5: ("ed", "dd"),
    6: ("ed", "de"),
    7: ("de", "dd"),
    8: ("de", "ed"),
}


def _second_stage(first: GridFunction, g2: FactorGrid, j2: int, kind: str) -> np.ndarray:
    if kind == "d":
        return delta_projection(first, g2, j2).values
    return average_projection(first, g2, j2).values


def all_biparameter_paraproducts(
    b: GridFunction, f: GridFunction, g1: FactorGrid, g2: FactorGrid
) -> dict[int, GridFunction]:
    """All eight paraproducts in one pass over the scale pairs."""
    level = b.mesh.level
    dtype = np.result_type(b.values, f.values)
    acc = {i: np.zeros(b.mesh.shape, dtype=dtype) for i in _BIPAR_FORMS}
    for j1 in range(level):
        stage1 = {
            ("b", "d"): delta_projection(b, g1, j1),
            ("b", "e"): average_projection(b, g1, j1),
            ("f", "d"): delta_projection(f, g1, j1),
            ("f", "e"): average_projection(f, g1, j1),
        }
        for j2 in range(level):
            cache: dict[tuple[str, str, str], np.ndarray] = {}

            def piece(who, form):
                key = (who, form[0], form[1])
                if key not in cache:
                    cache[key] = _second_stage(stage1[(who, form[0])], g2, j2, form[1])
                return cache[key]

            for i, (bform, fform) in _BIPAR_FORMS.items():
                acc[i] += piece("b", bform) * piece("f", fform)
    return {i: GridFunction(b.mesh, v) for i, v in acc.items()}


def biparameter_paraproduct(
    index: int, b: GridFunction, f: GridFunction, g1: FactorGrid, g2: FactorGrid
) -> GridFunction:
    """One of the eight paraproducts, summed over all cube pairs of (g1, g2)."""
    if index not in _BIPAR_FORMS:
        raise ValueError(f"paraproduct index must be 1..8, got {index}")
    bform, fform = _BIPAR_FORMS[index]
    level = b.mesh.level
    acc = np.zeros(b.mesh.shape, dtype=np.result_type(b.values, f.values))
    for j1 in range(level):
        b1 = delta_projection(b, g1, j1) if bform[0] == "d" else average_projection(b, g1, j1)
        f1 = delta_projection(f, g1, j1) if fform[0] == "d" else average_projection(f, g1, j1)
        for j2 in range(level):
            acc = acc + _second_stage(b1, g2, j2, bform[1]) * _second_stage(f1, g2, j2, fform[1])
    return GridFunction(b.mesh, acc)


def oneparameter_paraproduct(
    variant: int, axis: int, b: GridFunction, f: GridFunction, grid: FactorGrid
) -> GridFunction:
    """Variant 1: sum_I D_I b D_I f; variant 2: sum_I D_I b E_I f (along one factor)."""
    if variant not in (1, 2):
        raise ValueError(f"variant must be 1 or 2, got {variant}")
    if grid.axis != axis:
        raise ValueError("grid does not act on the requested axis")
    acc = np.zeros(b.mesh.shape, dtype=np.result_type(b.values, f.values))
    for j in range(b.mesh.level):
        db = delta_projection(b, grid, j).values
        other = delta_projection(f, grid, j) if variant == 1 else average_projection(f, grid, j)
        acc = acc + db * other.values
    return GridFunction(b.mesh, acc)


def indicator_block_decomposition(b: GridFunction, rect: DyadicRectangle) -> dict[str, GridFunction]:
    """The four martingale blocks of 1_R b (oscillation in both factors,
    in the second only, in the first only, and the plain average)."""
    mesh = b.mesh
    ind = rect.indicator()
    a1 = cube_average(b, rect.first).broadcast()  # <b>_{I0,1}(x2)
    a2 = cube_average(b, rect.second).broadcast()  # <b>_{J0,2}(x1)
    ar = cube_average(b, rect)
    return {
        "both": GridFunction(mesh, ind * (b.values - a1 - a2 + ar)),
        "axis2": GridFunction(mesh, ind * (a1 - ar)),
        "axis1": GridFunction(mesh, ind * (a2 - ar)),
        "average": GridFunction(mesh, ind * ar),
    }


@dataclass(frozen=True)
class ExpansionResult:
    mode: str
    lhs: complex | float
    terms: dict[str, complex | float]

    @property
    def residual(self) -> complex | float:
        return self.lhs - sum(self.terms.values())

    @property
    def relative_residual(self) -> float:
        scale = max(abs(self.lhs), max((abs(v) for v in self.terms.values()), default=0.0), 1e-300)
        return abs(self.residual) / scale


def _average_weight(cube) -> float:
    # pairing against 1_V/|V| equals |V|^{-1/2} times pairing against h^0_V
    return cube.volume ** -0.5


def expand_product(
    b: GridFunction,
    f: GridFunction,
    rect: DyadicRectangle,
    mode: str,
    eta: tuple[int, ...] | None = None,
    theta: tuple[int, ...] | None = None,
) -> ExpansionResult:
    """Expand <b f, (Haar data of rect)> into its named identity terms.

    mode 'both'  : pair against h_I ⊗ h_J (both oscillating)
    mode 'axis1' : pair against h_I ⊗ 1_J/|J| (oscillating in x1 only)
    mode 'axis2' : pair against 1_I/|I| ⊗ h_J
    mode 'none'  : the plain average <b f>_R
    """
    I0, J0 = rect.first, rect.second
    g1, g2 = I0.grid, J0.grid
    eta = eta or cancellative_patterns(g1.dim)[-1]
    theta = theta or cancellative_patterns(g2.dim)[-1]
    bf = b * f
    if mode == "both":
        hx, hy = HaarIndex(I0, eta), HaarIndex(J0, theta)
        lhs = haar_pair(bf, hx, hy)
        terms = {
            f"A{i}": haar_pair(biparameter_paraproduct(i, b, f, g1, g2), hx, hy) for i in range(1, 9)
        }
        terms["average"] = cube_average(b, rect) * haar_pair(f, hx, hy)
        return ExpansionResult(mode, lhs, terms)
    if mode in ("axis1", "axis2"):
        if mode == "axis1":
            h = HaarIndex(I0, eta)
            avg_cube, grid_for_a, axis = J0, g1, 1
        else:
            h = HaarIndex(J0, theta)
            avg_cube, grid_for_a, axis = I0, g2, 2
        w = _average_weight(avg_cube)
        hx0 = HaarIndex(avg_cube, (0,) * avg_cube.dim)

        def paired(func):
            if mode == "axis1":
                return haar_pair(func, h, hx0) * w
            return haar_pair(func, hx0, h) * w

        lhs = paired(bf)
        terms = {
            "a1": paired(oneparameter_paraproduct(1, axis, b, f, grid_for_a)),
            "a2": paired(oneparameter_paraproduct(2, axis, b, f, grid_for_a)),
        }
        coeff = (
            partial_coeff_table(f, grid_for_a)[_pattern_code(eta if mode == "axis1" else theta)]
        )[grid_for_a.cube_index(h.cube)]
        avg_line = partial_average_table(b, grid_for_a)[grid_for_a.cube_index(h.cube)]
        ar = cube_average(b, rect)
        other_axis = 2 if mode == "axis1" else 1
        inner = ((avg_line - ar) * coeff).reshape(b.mesh.factor_shape(other_axis))
        terms["middle"] = inner[np.ix_(*avg_cube.coord_cells())].mean()
        terms["average"] = ar * paired(f)
        return ExpansionResult(mode, lhs, terms)
    if mode == "none":
        ar = cube_average(b, rect)
        lhs = cube_average(bf, rect)
        terms = {
            "oscillation": cube_average((b - ar) * f, rect),
            "average": ar * cube_average(f, rect),
        }
        return ExpansionResult(mode, lhs, terms)
    raise ValueError(f"unknown expansion mode {mode!r}")


def _pattern_code(eta: tuple[int, ...]) -> int:
    code = 0
    for c, e in enumerate(eta):
        code |= e << c
    return code


# -- vectorized residual tables (identity suite) ------------------------------

def _row_average_matrix(grid: FactorGrid) -> np.ndarray:
    """M[cube, cell]: averaging a cell-indexed vector over each cube."""
    from .signal import factor_profiles

    h0 = factor_profiles(grid)[0]
    vols = cube_volumes(grid)
    fvol = grid.mesh.factor_cell_volume(grid.axis)
    return h0 * (fvol / np.sqrt(vols))[:, None]


def expansion_residual_both(
    b: GridFunction, f: GridFunction, g1: FactorGrid, g2: FactorGrid
) -> np.ndarray:
    """Relative residual of the both-oscillating expansion at every rectangle.

    Entries at rectangles without an oscillating Haar function (finest
    level in either factor) are zero.
    """
    p1 = _pattern_code(cancellative_patterns(g1.dim)[-1])
    p2 = _pattern_code(cancellative_patterns(g2.dim)[-1])
    lhs = pair_tables(b * f, g1, g2)[p1, p2]
    total = np.zeros_like(lhs)
    scale = np.abs(lhs).copy()
    paraproducts = all_biparameter_paraproducts(b, f, g1, g2)
    for i in range(1, 9):
        t = pair_tables(paraproducts[i], g1, g2)[p1, p2]
        total += t
        np.maximum(scale, np.abs(t), out=scale)
    avg = rect_average_table(b, g1, g2) * pair_tables(f, g1, g2)[p1, p2]
    total += avg
    np.maximum(scale, np.abs(avg), out=scale)
    res = np.abs(lhs - total) / np.maximum(scale, 1e-300)
    _zero_finest(res, g1, g2)
    return res


def expansion_residual_mixed(
    b: GridFunction, f: GridFunction, g1: FactorGrid, g2: FactorGrid, mode: str = "axis1"
) -> np.ndarray:
    """Relative residual of the one-factor expansion at every rectangle."""
    if mode == "axis2":
        return expansion_residual_mixed(b.transpose(), f.transpose(), _swap(g2), _swap(g1), "axis1")
    p1 = _pattern_code(cancellative_patterns(g1.dim)[-1])
    w2 = 1.0 / np.sqrt(cube_volumes(g2))  # 1_J/|J| = |J|^{-1/2} h^0_J
    lhs = pair_tables(b * f, g1, g2)[p1, 0] * w2
    a1 = pair_tables(oneparameter_paraproduct(1, 1, b, f, g1), g1, g2)[p1, 0] * w2
    a2 = pair_tables(oneparameter_paraproduct(2, 1, b, f, g1), g1, g2)[p1, 0] * w2
    avr = rect_average_table(b, g1, g2)
    coeff = partial_coeff_table(f, g1)[p1]
    avg_line = partial_average_table(b, g1)
    row_avg = _row_average_matrix(g2)
    middle = (avg_line * coeff) @ row_avg.T - avr * (coeff @ row_avg.T)
    average = avr * (pair_tables(f, g1, g2)[p1, 0] * w2)
    total = a1 + a2 + middle + average
    scale = np.abs(lhs)
    for t in (a1, a2, middle, average):
        scale = np.maximum(scale, np.abs(t))
    res = np.abs(lhs - total) / np.maximum(scale, 1e-300)
    _zero_finest(res, g1, None)
    return res


def expansion_residual_none(
    b: GridFunction, f: GridFunction, g1: FactorGrid, g2: FactorGrid
) -> np.ndarray:
    """Relative residual of the no-expansion identity at every rectangle.

    The oscillation term <(b - <b>_R) f>_R is built from an explicit
    per-rectangle function, not by rearranging the left side.
    """
    lhs = rect_average_table(b * f, g1, g2)
    avr = rect_average_table(b, g1, g2)
    avf = rect_average_table(f, g1, g2)
    res = np.zeros_like(lhs)
    for cube1 in g1.all_cubes():
        i = g1.cube_index(cube1)
        for cube2 in g2.all_cubes():
            j = g2.cube_index(cube2)
            rect = DyadicRectangle(cube1, cube2)
            osc = cube_average((b - avr[i, j]) * f, rect)
            total = osc + avr[i, j] * avf[i, j]
            scale = max(abs(lhs[i, j]), abs(osc), abs(avr[i, j] * avf[i, j]), 1e-300)
            res[i, j] = abs(lhs[i, j] - total) / scale
    return res


def _zero_finest(res: np.ndarray, g1: FactorGrid | None, g2: FactorGrid | None) -> None:
    from .signal import cube_levels

    if g1 is not None:
        res[cube_levels(g1) == g1.mesh.level, :] = 0.0
    if g2 is not None:
        res[:, cube_levels(g2) == g2.mesh.level] = 0.0


def _swap(grid: FactorGrid) -> FactorGrid:
    return FactorGrid(grid.mesh.transposed, 3 - grid.axis, grid.bits)
