"""Norms, BMO-type estimators, Muckenhoupt characteristics, generators.

Everything is a finite computation on the mesh.  Non-dyadic suprema run
over all mesh-aligned (wrap-aware) windows, the largest finite family, so
they dominate every shifted dyadic grid.  The product-BMO supremum over
arbitrary admissible open sets is not finitely computable; it is reported
as a lower bound relative to a documented set family (single dyadic
rectangles plus threshold-set unions plus caller-supplied sets), together
with a rigorous upper-bound proxy used for coefficient normalization.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grids import FactorGrid, children, standard_grid
from .maximal import _circ_window_sum, adapted_sup, deviation_sup_rank2
from .mesh import FactorFunction, GridFunction, Mesh
from .signal import average_projection, cube_levels, cube_volumes, pair_tables


# -- Lebesgue and quasi-norms -------------------------------------------------

def lp_norm(f, p: float, weight: "Weight | GridFunction | None" = None) -> float:
    """(integral of |f|^p w)^(1/p); p = inf gives the max cell value."""
    if p == np.inf:
        return float(np.abs(f.values).max())
    if not p > 0:
        raise ValueError(f"exponent must be positive, got {p}")
    w = 1.0
    if weight is not None:
        wf = weight.w if isinstance(weight, Weight) else weight
        w = wf.values
    if isinstance(f, FactorFunction):
        vol = f.mesh.factor_cell_volume(f.axis)
    else:
        vol = f.mesh.cell_volume
    return float((np.abs(f.values) ** p * w).sum() * vol) ** (1.0 / p)


# -- BMO-type norms -----------------------------------------------------------

def _dyadic_oscillation_sup(b, grids) -> float:
    """sup over the grids' rectangles (or one grid's cubes) of <|b - <b>_R|>_R."""
    out = 0.0
    if isinstance(b, FactorFunction):
        (grid,) = grids
        for j in range(b.mesh.level + 1):
            c = average_projection(b, grid, j)
            dev = average_projection(abs(b - c), grid, j)
            out = max(out, float(dev.values.max()))
        return out
    g1, g2 = grids
    for j1 in range(b.mesh.level + 1):
        e1 = average_projection(b, g1, j1)
        for j2 in range(b.mesh.level + 1):
            c = average_projection(e1, g2, j2)
            dev = average_projection(average_projection(abs(b - c), g1, j1), g2, j2)
            out = max(out, float(dev.values.max()))
    return out


def bmo_norm(b, mode: str = "bmo", grids=None) -> float:
    """Oscillation norm of a symbol.

    modes for a GridFunction: 'bmo' (all mesh rectangles) and
    'bmo-dyadic' (rectangles of a grid pair, standard by default);
    for a FactorFunction: 'BMO' (all factor cubes) and 'BMO-dyadic'.
    """
    if isinstance(b, GridFunction):
        if mode == "bmo":
            if b.mesh.n == 1 and b.mesh.m == 1:
                return deviation_sup_rank2(b.values.real)
            groups = [b.mesh.factor_axes(1), b.mesh.factor_axes(2)]
            sup, _ = adapted_sup(b.values.real, np.ones(b.mesh.shape), groups, b.mesh.cells, False)
            return sup
        if mode == "bmo-dyadic":
            if grids is None:
                grids = (standard_grid(b.mesh, 1), standard_grid(b.mesh, 2))
            return _dyadic_oscillation_sup(b, grids)
    if isinstance(b, FactorFunction):
        if mode == "BMO":
            if b.mesh.factor_dim(b.axis) == 1:
                return deviation_sup_rank2(b.values.real[:, None])
            d = b.values.ndim
            sup, _ = adapted_sup(
                b.values.real, np.ones_like(b.values, dtype=float), [tuple(range(d))], b.mesh.cells, False
            )
            return sup
        if mode == "BMO-dyadic":
            if grids is None:
                grids = (standard_grid(b.mesh, b.axis),)
            return _dyadic_oscillation_sup(b, grids)
    raise ValueError(f"mode {mode!r} does not apply to {type(b).__name__}")


# -- sequence BMO -------------------------------------------------------------

@lru_cache(maxsize=256)
def _child_index_map(grid: FactorGrid) -> tuple[np.ndarray, np.ndarray]:
    """(parents, children) flat-index arrays, one row per non-leaf cube."""
    parents, kids = [], []
    for cube in grid.all_cubes():
        if cube.level >= grid.mesh.level:
            continue
        parents.append(grid.cube_index(cube))
        kids.append([grid.cube_index(c) for c in children(cube)])
    return np.array(parents), np.array(kids)


def subtree_sums(values: np.ndarray, grid: FactorGrid, axis: int = 0) -> np.ndarray:
    """out[V0] = sum over V ⊆ V0 (same grid) of values[V], along one array axis."""
    vals = np.moveaxis(np.asarray(values, dtype=float), axis, 0).copy()
    parents, kids = _child_index_map(grid)
    levels = cube_levels(grid)
    for j in range(grid.mesh.level - 1, -1, -1):
        rows = levels[parents] == j
        p = parents[rows]
        vals[p] += vals[kids[rows]].sum(axis=1)
    return np.moveaxis(vals, 0, axis)


def sequence_bmo_norm(values: np.ndarray, grid: FactorGrid) -> float:
    """sup_{V0} ( (1/|V0|) sum_{V ⊆ V0} |a_V|^2 )^(1/2), exact over all cubes."""
    sq = np.abs(np.asarray(values)) ** 2
    if sq.shape != (grid.cube_count(),):
        raise ValueError("need one scalar per cube in flat-index order")
    acc = subtree_sums(sq, grid)
    return float(np.sqrt((acc / cube_volumes(grid)).max()))


def rect_subtree_sums(sq: np.ndarray, g1: FactorGrid, g2: FactorGrid) -> np.ndarray:
    """T[K,V] = sum of sq over rectangle indices (I,J) with I ⊆ K, J ⊆ V."""
    return subtree_sums(subtree_sums(sq, g1, axis=0), g2, axis=1)


def admissible_cover(omega: np.ndarray, g1: FactorGrid, g2: FactorGrid):
    """Largest admissible subset: the union of all grid rectangles inside omega.

    Returns (cover mask, rect_inside bool table over cube-index pairs).
    """
    mesh = g1.mesh
    inside = np.zeros((g1.cube_count(), g2.cube_count()), dtype=bool)
    cover = np.zeros(mesh.shape, dtype=bool)
    f = GridFunction(mesh, omega.astype(float))
    axes = mesh.factor_axes(1) + mesh.factor_axes(2)
    for j1 in range(mesh.level + 1):
        e1 = average_projection(f, g1, j1)
        side1 = mesh.cells >> j1
        for j2 in range(mesh.level + 1):
            frac = average_projection(e1, g2, j2).values
            full = frac > 1.0 - 1e-12
            cover |= full
            side2 = mesh.cells >> j2
            t = g1.translation(j1) + g2.translation(j2)
            rolled = np.roll(full, tuple(-tc for tc in t), axis=axes)
            sel = tuple(
                slice(None, None, side1 if ax in mesh.factor_axes(1) else side2) for ax in axes
            )
            # piecewise constant on tiles, so the tile-origin value decides
            tiles = rolled[sel].reshape(1 << (j1 * g1.dim), 1 << (j2 * g2.dim))
            b1, b2 = g1._level_base(j1), g2._level_base(j2)
            inside[b1 : b1 + tiles.shape[0], b2 : b2 + tiles.shape[1]] = tiles
    return cover, inside


def sequence_bmo_rect(
    sq_coeffs: np.ndarray,
    g1: FactorGrid,
    g2: FactorGrid,
    extra_sets: list[np.ndarray] | None = None,
) -> tuple[float, str]:
    """Family-relative lower bound for the product-BMO sequence norm.

    ``sq_coeffs[I, J] = |a_{I x J}|^2``.  The family contains every grid
    rectangle and, optionally, the admissible covers of caller sets.
    """
    mesh = g1.mesh
    t = rect_subtree_sums(sq_coeffs, g1, g2)
    areas = np.outer(cube_volumes(g1), cube_volumes(g2))
    best = float(np.sqrt((t / areas).max()))
    names = ["all grid rectangles"]
    for k, omega in enumerate(extra_sets or []):
        cover, inside = admissible_cover(np.asarray(omega, dtype=bool), g1, g2)
        measure = cover.mean()
        if measure <= 0:
            continue
        mass = float(sq_coeffs[inside].sum())
        best = max(best, float(np.sqrt(mass / measure)))
        names.append(f"caller set {k} (cover measure {measure:.3g})")
    return best, " + ".join(names)


def product_bmo_upper_proxy(sq_coeffs: np.ndarray, g1: FactorGrid, g2: FactorGrid) -> float:
    """Rigorous upper bound: sqrt(total mass / smallest nonzero-coefficient rectangle).

    Any admissible set with a nonzero numerator contains some rectangle
    carrying a nonzero coefficient, so its measure is at least the
    smallest such rectangle's area.
    """
    total = float(sq_coeffs.sum())
    if total == 0.0:
        return 0.0
    areas = np.outer(cube_volumes(g1), cube_volumes(g2))
    min_area = float(areas[sq_coeffs > 0].min())
    return float(np.sqrt(total / min_area))


def product_bmo_estimate(
    b: GridFunction,
    g1: FactorGrid,
    g2: FactorGrid,
    extra_sets: list[np.ndarray] | None = None,
    n_thresholds: int = 8,
) -> tuple[float, float]:
    """(single-rectangle lower bound, heuristic family lower bound).

    The heuristic family adds admissible covers of threshold sets of the
    coefficient mass density; it always contains the single rectangles,
    so heuristic >= lower.
    """
    from .analysis import square_function

    tables = pair_tables(b, g1, g2)
    sq = np.zeros((g1.cube_count(), g2.cube_count()))
    for p1 in range(1, 1 << g1.dim):
        for p2 in range(1, 1 << g2.dim):
            sq += np.abs(tables[p1, p2]) ** 2
    t = rect_subtree_sums(sq, g1, g2)
    areas = np.outer(cube_volumes(g1), cube_volumes(g2))
    lower = float(np.sqrt((t / areas).max()))
    density = square_function(b, "bipar", grids=(g1, g2)).values
    sets = list(extra_sets or [])
    positive = density[density > 0]
    if positive.size:
        for q in np.linspace(0.1, 0.9, n_thresholds):
            sets.append(density > np.quantile(positive, q))
    heuristic, _ = sequence_bmo_rect(sq, g1, g2, sets)
    return lower, max(lower, heuristic)


# -- Muckenhoupt characteristics ----------------------------------------------

def _window_means_max_product(w: np.ndarray, s: np.ndarray, pexp: float, groups, n: int) -> float:
    from .maximal import _group_shapes

    best = 1.0
    for sides in _group_shapes(groups, n):
        cells = 1
        ws, ss = w, s
        for side, axes in zip(sides, groups):
            for ax in axes:
                ws = _circ_window_sum(ws, side, ax)
                ss = _circ_window_sum(ss, side, ax)
                cells *= side
        val = (ws / cells) * (ss / cells) ** pexp
        best = max(best, float(val.max()))
    return best


def ap_characteristic(w, p: float, mode: str = "bipar") -> float:
    """sup over windows of <w>_R <w^(1-p')>_R^(p-1); windows are rectangles
    (bipar) or factor cubes (one-parameter)."""
    if not 1.0 < p < np.inf:
        raise ValueError(f"characteristic needs 1 < p < inf, got {p}")
    vals = w.w.values if isinstance(w, Weight) else w.values
    if np.min(vals.real) <= 0 or np.iscomplexobj(vals):
        raise ValueError("weights must be strictly positive real functions")
    sigma = vals ** (-1.0 / (p - 1.0))
    mesh = w.w.mesh if isinstance(w, Weight) else w.mesh
    if mode == "bipar":
        groups = [mesh.factor_axes(1), mesh.factor_axes(2)]
    elif mode == "one":
        groups = [tuple(range(vals.ndim))]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _window_means_max_product(vals, sigma, p - 1.0, groups, mesh.cells)


@dataclass
class Weight:
    """A strictly positive function with cached characteristics."""

    w: GridFunction
    cache: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if np.min(self.w.values.real) <= 0:
            raise ValueError("weights must be strictly positive")

    def characteristic(self, p: float, mode: str = "bipar") -> float:
        key = (p, mode)
        if key not in self.cache:
            self.cache[key] = ap_characteristic(self.w, p, mode)
        return self.cache[key]


# -- generators ----------------------------------------------------------------

def generate_bmo_function(
    rng: np.random.Generator,
    mesh: Mesh,
    target: float = 1.0,
    mode: str = "bmo",
    decay: float = 0.5,
) -> GridFunction:
    """Random Haar-coefficient symbol rescaled to an exact oscillation norm.

    All cancellative coefficient blocks are populated (both-oscillating,
    and the two single-factor blocks), so the symbol has zero mean.
    """
    if target <= 0:
        raise ValueError("target norm must be positive")
    g1, g2 = standard_grid(mesh, 1), standard_grid(mesh, 2)
    from .signal import synthesize

    for _ in range(16):
        total = np.zeros(mesh.shape)
        lev1, lev2 = cube_levels(g1), cube_levels(g2)
        w1 = 2.0 ** (-decay * lev1) * np.sqrt(cube_volumes(g1))
        w2 = 2.0 ** (-decay * lev2) * np.sqrt(cube_volumes(g2))
        for p1 in range(1 << g1.dim):
            for p2 in range(1 << g2.dim):
                if p1 == 0 and p2 == 0:
                    continue  # no top average: zero mean
                coeff = rng.standard_normal((g1.cube_count(), g2.cube_count()))
                coeff *= np.outer(w1 * (lev1 < mesh.level if p1 else lev1 == 0), w2 * (lev2 < mesh.level if p2 else lev2 == 0))
                total += synthesize(coeff, g1, p1, g2, p2).values
        b = GridFunction(mesh, total)
        norm = bmo_norm(b, mode)
        if norm > 1e-12:
            return b * (target / norm)
    raise RuntimeError("degenerate draw: symbol kept vanishing")


def generate_weight(
    rng: np.random.Generator, mesh: Mesh, p: float = 2.0, strength: float = 0.25
) -> Weight:
    """w = exp(strength * b) with b an oscillation-normalized symbol."""
    b = generate_bmo_function(rng, mesh, target=1.0)
    return Weight(GridFunction(mesh, np.exp(strength * b.values.real)))
