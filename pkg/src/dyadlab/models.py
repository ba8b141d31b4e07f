"""Bilinear bi-parameter model operators.

Three families, all bilinear with a trilinear dual form:

  * partial paraproducts: an ancestor ("shift") structure of complexity
    (k1,k2,k3) in one factor and a sequence-BMO coefficient family in the
    other; nine types = (which shift slot is averaging) x (which slot
    carries the oscillating factor cube);
  * full paraproducts: a plain coefficient a_{K,V} per rectangle, with
    the oscillating factors h_K and h_V each placed in one of the three
    slots (nine forms); remaining slots see normalized averages;
  * bilinear shifts: ancestor structures of complexity k and v in both
    factors with a pointwise coefficient bound.

Coefficient normalizations (checked at construction):

  partial: ||{a_{K,V,(I_i)}}_V||_seq-BMO <= prod |I_i|^(1/2) / |K|^2,
  full:    upper-bound proxy for the product-BMO sequence norm <= 1,
  shift:   |a| <= prod |I_i|^(1/2)/|K|^2 * prod |J_i|^(1/2)/|V|^2.

Generators saturate these bounds (extremal draws) so norm-estimation
sweeps probe the worst case inside the sampled family.  Oscillating
slots use the all-ones sign pattern; on one-dimensional factors that is
the unique oscillating Haar function.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grids import DyadicCube, FactorGrid, children, shifted_grid, standard_grid
from .mesh import GridFunction, Mesh
from .norms import product_bmo_upper_proxy, sequence_bmo_rect, subtree_sums
from .signal import cube_levels, cube_volumes, pair_tables, synthesize

AUDIT_SLACK = 1.0 + 1e-9


def descendants(cube: DyadicCube, depth: int) -> list[DyadicCube]:
    """All cubes of the cube's grid at the given depth below it."""
    out = [cube]
    for _ in range(depth):
        out = [child for c in out for child in children(c)]
    return out


def _canc(grid: FactorGrid) -> int:
    return (1 << grid.dim) - 1


def _check_slot(name: str, value: int) -> None:
    if value not in (1, 2, 3):
        raise ValueError(f"{name} must be 1, 2 or 3, got {value}")


# -- operator containers -------------------------------------------------------

@dataclass(frozen=True)
class PartialParaproduct:
    """Shift structure on ``shift_axis``, coefficient family in the other factor."""

    shift_grid: FactorGrid
    para_grid: FactorGrid
    complexity: tuple[int, int, int]
    avg_slot: int  # which shift-factor slot carries the averaging function
    haar_slot: int  # which slot carries the oscillating para-factor cube
    K: np.ndarray  # flat cube ids in shift_grid
    I: np.ndarray  # (nnz, 3) descendant ids in shift_grid
    V: np.ndarray  # flat cube ids in para_grid
    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    validate: bool = True

    def __post_init__(self) -> None:
        _check_slot("avg_slot", self.avg_slot)
        _check_slot("haar_slot", self.haar_slot)
        if self.shift_grid.axis == self.para_grid.axis:
            raise ValueError("shift and paraproduct factors must differ")
        if any(k < 0 for k in self.complexity):
            raise ValueError("complexity must be nonnegative")
        for arr, name in ((self.K, "K"), (self.V, "V"), (self.values, "values")):
            if len(arr) != len(self.values):
                raise ValueError(f"entry array {name} has inconsistent length")
        if self.I.shape != (len(self.values), 3):
            raise ValueError("need one descendant triple per entry")
        levK = cube_levels(self.shift_grid)[self.K] if len(self.K) else np.array([])
        levI = cube_levels(self.shift_grid)[self.I] if len(self.K) else np.zeros((0, 3))
        if len(self.K) and not np.array_equal(levI, levK[:, None] + np.array(self.complexity)[None, :]):
            raise ValueError("descendant levels do not match the complexity")
        if self.validate and len(self.values):
            worst = audit_partial(self)
            if worst > AUDIT_SLACK:
                raise ValueError(f"sequence-BMO bound violated by factor {worst:.6f}")

    @property
    def shift_axis(self) -> int:
        return self.shift_grid.axis

    @property
    def mesh(self) -> Mesh:
        return self.shift_grid.mesh


@dataclass(frozen=True)
class FullParaproduct:
    grid1: FactorGrid
    grid2: FactorGrid
    k_slot: int  # slot carrying h_K (factor-1 oscillation)
    v_slot: int  # slot carrying h_V (factor-2 oscillation)
    K: np.ndarray
    V: np.ndarray
    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    validate: bool = True

    def __post_init__(self) -> None:
        _check_slot("k_slot", self.k_slot)
        _check_slot("v_slot", self.v_slot)
        if self.validate and len(self.values):
            proxy = full_upper_proxy(self)
            if proxy > AUDIT_SLACK:
                raise ValueError(f"product-BMO proxy bound violated: {proxy:.6f}")

    @property
    def mesh(self) -> Mesh:
        return self.grid1.mesh


@dataclass(frozen=True)
class DyadicShiftBilinear:
    grid1: FactorGrid
    grid2: FactorGrid
    complexity1: tuple[int, int, int]
    complexity2: tuple[int, int, int]
    tags1: tuple[int, int, int]  # 1 = oscillating factor in the first-factor slot
    tags2: tuple[int, int, int]
    K: np.ndarray
    I: np.ndarray  # (nnz, 3)
    V: np.ndarray
    J: np.ndarray  # (nnz, 3)
    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    validate: bool = True

    def __post_init__(self) -> None:
        if not any(self.tags1) or not any(self.tags2):
            raise ValueError("each factor needs at least one oscillating slot")
        if self.validate and len(self.values):
            worst = audit_shift(self)
            if worst > AUDIT_SLACK:
                raise ValueError(f"pointwise coefficient bound violated by {worst:.6f}")

    @property
    def mesh(self) -> Mesh:
        return self.grid1.mesh


# -- audits ---------------------------------------------------------------------

def partial_bound(op: PartialParaproduct) -> np.ndarray:
    """prod |I_i|^(1/2) / |K|^2 per entry."""
    vols = cube_volumes(op.shift_grid)
    return np.sqrt(vols[op.I]).prod(axis=1) / vols[op.K] ** 2


def audit_partial(op: PartialParaproduct) -> float:
    """max over coefficient families of (sequence-BMO norm) / bound."""
    if not len(op.values):
        return 0.0
    keys = {}
    rows = []
    for k, tri in zip(op.K, map(tuple, op.I)):
        rows.append(keys.setdefault((int(k), tri), len(keys)))
    rows = np.array(rows)
    nv = op.para_grid.cube_count()
    mat = np.bincount(rows * nv + op.V, np.abs(op.values) ** 2, minlength=len(keys) * nv)
    mat = mat.reshape(len(keys), nv)
    acc = subtree_sums(mat, op.para_grid, axis=1)
    norms = np.sqrt((acc / cube_volumes(op.para_grid)[None, :]).max(axis=1))
    bounds = np.zeros(len(keys))
    bounds[rows] = partial_bound(op)
    return float((norms / bounds).max())


def full_upper_proxy(op: FullParaproduct) -> float:
    sq = np.zeros((op.grid1.cube_count(), op.grid2.cube_count()))
    np.add.at(sq, (op.K, op.V), np.abs(op.values) ** 2)
    return product_bmo_upper_proxy(sq, op.grid1, op.grid2)


def full_lower_estimate(op: FullParaproduct) -> float:
    sq = np.zeros((op.grid1.cube_count(), op.grid2.cube_count()))
    np.add.at(sq, (op.K, op.V), np.abs(op.values) ** 2)
    lower, _ = sequence_bmo_rect(sq, op.grid1, op.grid2)
    return lower


def shift_bound(op: DyadicShiftBilinear) -> np.ndarray:
    v1 = cube_volumes(op.grid1)
    v2 = cube_volumes(op.grid2)
    return (
        np.sqrt(v1[op.I]).prod(axis=1)
        / v1[op.K] ** 2
        * np.sqrt(v2[op.J]).prod(axis=1)
        / v2[op.V] ** 2
    )


def audit_shift(op: DyadicShiftBilinear) -> float:
    if not len(op.values):
        return 0.0
    return float((np.abs(op.values) / shift_bound(op)).max())


# -- generators -------------------------------------------------------------------

def _feasible_levels(mesh: Mesh, complexity, avg_slot) -> list[int]:
    out = []
    for lev in range(mesh.level + 1):
        ok = True
        for s, k in enumerate(complexity, start=1):
            cap = mesh.level if s == avg_slot else mesh.level - 1
            if lev + k > cap:
                ok = False
        if ok:
            out.append(lev)
    return out


def _ancestor_structure(grid: FactorGrid, complexity, avg_slot):
    """All (K, (I_1,I_2,I_3)) index tuples feasible at the resolution."""
    entries = []
    for lev in _feasible_levels(grid.mesh, complexity, avg_slot):
        for K in grid.cubes(lev):
            kid = grid.cube_index(K)
            slots = [
                [grid.cube_index(c) for c in descendants(K, k)] for k in complexity
            ]
            for i1 in slots[0]:
                for i2 in slots[1]:
                    for i3 in slots[2]:
                        entries.append((kid, (i1, i2, i3)))
    return entries


def generate_partial_coeffs(
    rng: np.random.Generator,
    shift_grid: FactorGrid,
    para_grid: FactorGrid,
    complexity: tuple[int, int, int],
    avg_slot: int = 1,
    haar_slot: int = 1,
    density: float = 1.0,
    seed_label=None,
) -> PartialParaproduct:
    """Random extremal partial paraproduct: every nonzero family is scaled
    so its sequence-BMO norm equals the allowed bound exactly."""
    mesh = shift_grid.mesh
    if not _feasible_levels(mesh, complexity, avg_slot):
        raise ValueError(f"complexity {complexity} is infeasible at resolution {mesh.level}")
    structure = _ancestor_structure(shift_grid, complexity, avg_slot)
    vlev = cube_levels(para_grid)
    v_ok = np.nonzero(vlev < mesh.level)[0]  # the haar slot needs oscillation
    vols = cube_volumes(shift_grid)
    nfam = len(structure)
    draw = rng.standard_normal((nfam, len(v_ok)))
    draw *= rng.random(draw.shape) < density
    full = np.zeros((nfam, para_grid.cube_count()))
    full[:, v_ok] = draw
    acc = subtree_sums(full**2, para_grid, axis=1)
    norms = np.sqrt((acc / cube_volumes(para_grid)[None, :]).max(axis=1))
    bounds = np.array(
        [np.sqrt(vols[list(tri)]).prod() / vols[kid] ** 2 for kid, tri in structure]
    )
    scale = np.divide(bounds, norms, out=np.zeros(nfam), where=norms > 0)
    full *= scale[:, None]
    fam_idx, v_idx = np.nonzero(full)
    K_arr = np.array([structure[i][0] for i in fam_idx], dtype=int)
    I_arr = np.array([structure[i][1] for i in fam_idx], dtype=int).reshape(-1, 3)
    return PartialParaproduct(
        shift_grid,
        para_grid,
        tuple(complexity),
        avg_slot,
        haar_slot,
        K_arr,
        I_arr,
        v_idx,
        full[fam_idx, v_idx],
        provenance={"seed": seed_label, "scheme": "extremal-seq-bmo", "density": density},
    )


def generate_full_coeffs(
    rng: np.random.Generator,
    grid1: FactorGrid,
    grid2: FactorGrid,
    k_slot: int = 3,
    v_slot: int = 2,
    density: float = 1.0,
    seed_label=None,
) -> FullParaproduct:
    """Random full paraproduct scaled by the rigorous upper-bound proxy, so
    the product-BMO constraint <= 1 is guaranteed (and saturated)."""
    lev1 = cube_levels(grid1)
    lev2 = cube_levels(grid2)
    ok1 = np.nonzero(lev1 < grid1.mesh.level)[0]
    ok2 = np.nonzero(lev2 < grid2.mesh.level)[0]
    draw = rng.standard_normal((len(ok1), len(ok2)))
    draw *= rng.random(draw.shape) < density
    K, V = np.nonzero(draw)
    values = draw[K, V]
    K, V = ok1[K], ok2[V]
    if len(values):
        sq = np.zeros((grid1.cube_count(), grid2.cube_count()))
        np.add.at(sq, (K, V), np.abs(values) ** 2)
        proxy = product_bmo_upper_proxy(sq, grid1, grid2)
        values = values / proxy
    return FullParaproduct(
        grid1,
        grid2,
        k_slot,
        v_slot,
        K,
        V,
        values,
        provenance={"seed": seed_label, "scheme": "upper-proxy-saturated", "density": density},
    )


def generate_shift_coeffs(
    rng: np.random.Generator,
    grid1: FactorGrid,
    grid2: FactorGrid,
    complexity1: tuple[int, int, int],
    complexity2: tuple[int, int, int],
    tags1: tuple[int, int, int] = (1, 1, 1),
    tags2: tuple[int, int, int] = (1, 1, 1),
    density: float = 0.25,
    seed_label=None,
) -> DyadicShiftBilinear:
    """Random extremal bilinear shift: |a| saturates the coefficient bound."""
    mesh = grid1.mesh

    def slot_cap(tags):
        return [mesh.level - (1 if t else 0) for t in tags]

    s1 = _ancestor_structure(grid1, complexity1, avg_slot=_first_avg(tags1))
    s2 = _ancestor_structure(grid2, complexity2, avg_slot=_first_avg(tags2))
    lev1, lev2 = cube_levels(grid1), cube_levels(grid2)
    cap1, cap2 = slot_cap(tags1), slot_cap(tags2)
    v1, v2 = cube_volumes(grid1), cube_volumes(grid2)
    K_o, I_o, V_o, J_o, val_o = [], [], [], [], []
    for kid, tri1 in s1:
        if any(lev1[list(tri1)][s] > cap1[s] for s in range(3)):
            continue
        for vid, tri2 in s2:
            if any(lev2[list(tri2)][s] > cap2[s] for s in range(3)):
                continue
            if rng.random() >= density:
                continue
            bound = (
                np.sqrt(v1[list(tri1)]).prod() / v1[kid] ** 2
                * np.sqrt(v2[list(tri2)]).prod() / v2[vid] ** 2
            )
            K_o.append(kid)
            I_o.append(tri1)
            V_o.append(vid)
            J_o.append(tri2)
            val_o.append(bound * (1.0 if rng.random() < 0.5 else -1.0))
    return DyadicShiftBilinear(
        grid1,
        grid2,
        tuple(complexity1),
        tuple(complexity2),
        tuple(tags1),
        tuple(tags2),
        np.array(K_o, dtype=int),
        np.array(I_o, dtype=int).reshape(-1, 3),
        np.array(V_o, dtype=int),
        np.array(J_o, dtype=int).reshape(-1, 3),
        np.array(val_o),
        provenance={"seed": seed_label, "scheme": "extremal-pointwise", "density": density},
    )


def _first_avg(tags) -> int:
    # _ancestor_structure treats the averaging slot as level-L-capable;
    # with an all-oscillating tag triple no slot reaches level L
    for s, t in enumerate(tags, start=1):
        if not t:
            return s
    return 0


# -- application engine ---------------------------------------------------------

def _slot_plan(op) -> list[dict]:
    """Per-slot gather plan: pattern and scale per factor plus index arrays."""
    if isinstance(op, PartialParaproduct):
        sg, pg = op.shift_grid, op.para_grid
        vols_p = cube_volumes(pg)
        plan = []
        for s in range(1, 4):
            pat_shift = 0 if s == op.avg_slot else _canc(sg)
            pat_para = _canc(pg) if s == op.haar_slot else 0
            scale = np.ones(len(op.values)) if s == op.haar_slot else 1.0 / np.sqrt(vols_p[op.V])
            plan.append(
                {
                    "idx_shift": op.I[:, s - 1],
                    "idx_para": op.V,
                    "pat_shift": pat_shift,
                    "pat_para": pat_para,
                    "scale": scale,
                }
            )
        return plan
    if isinstance(op, FullParaproduct):
        v1 = cube_volumes(op.grid1)
        v2 = cube_volumes(op.grid2)
        plan = []
        for s in range(1, 4):
            pat1 = _canc(op.grid1) if s == op.k_slot else 0
            pat2 = _canc(op.grid2) if s == op.v_slot else 0
            scale = np.ones(len(op.values))
            if s != op.k_slot:
                scale = scale / np.sqrt(v1[op.K])
            if s != op.v_slot:
                scale = scale / np.sqrt(v2[op.V])
            plan.append(
                {"idx1": op.K, "idx2": op.V, "pat1": pat1, "pat2": pat2, "scale": scale}
            )
        return plan
    if isinstance(op, DyadicShiftBilinear):
        plan = []
        for s in range(1, 4):
            plan.append(
                {
                    "idx1": op.I[:, s - 1],
                    "idx2": op.J[:, s - 1],
                    "pat1": _canc(op.grid1) if op.tags1[s - 1] else 0,
                    "pat2": _canc(op.grid2) if op.tags2[s - 1] else 0,
                    "scale": 1.0,
                }
            )
        return plan
    raise TypeError(f"not a model operator: {type(op).__name__}")


def _axis_plan(op, slot):
    """(idx1, idx2, pat1, pat2) in mesh-axis order (factor 1 first)."""
    if isinstance(op, PartialParaproduct):
        if op.shift_axis == 1:
            return slot["idx_shift"], slot["idx_para"], slot["pat_shift"], slot["pat_para"]
        return slot["idx_para"], slot["idx_shift"], slot["pat_para"], slot["pat_shift"]
    return slot["idx1"], slot["idx2"], slot["pat1"], slot["pat2"]


def _grids_in_axis_order(op) -> tuple[FactorGrid, FactorGrid]:
    if isinstance(op, PartialParaproduct):
        if op.shift_axis == 1:
            return op.shift_grid, op.para_grid
        return op.para_grid, op.shift_grid
    return op.grid1, op.grid2


def trilinear_form(op, f1: GridFunction, f2: GridFunction, f3: GridFunction) -> float:
    """<Op(f1, f2), f3> as an explicit coefficient sum."""
    if not len(op.values):
        return 0.0
    g1, g2 = _grids_in_axis_order(op)
    plan = _slot_plan(op)
    total = np.array(op.values, dtype=np.result_type(f1.values, f2.values, f3.values))
    for f, slot in zip((f1, f2, f3), plan):
        idx1, idx2, pat1, pat2 = _axis_plan(op, slot)
        t = pair_tables(f, g1, g2)
        total = total * (t[pat1, pat2][idx1, idx2] * slot["scale"])
    return complex(total.sum()) if np.iscomplexobj(total) else float(total.sum())


def apply_operator(op, f1: GridFunction, f2: GridFunction) -> GridFunction:
    """The bilinear output function; duality-consistent with trilinear_form."""
    mesh = op.mesh
    if not len(op.values):
        return GridFunction.zeros(mesh)
    g1, g2 = _grids_in_axis_order(op)
    plan = _slot_plan(op)
    weights = np.array(op.values, dtype=np.result_type(f1.values, f2.values))
    for f, slot in zip((f1, f2), plan[:2]):
        idx1, idx2, pat1, pat2 = _axis_plan(op, slot)
        t = pair_tables(f, g1, g2)
        weights = weights * (t[pat1, pat2][idx1, idx2] * slot["scale"])
    out_slot = plan[2]
    idx1, idx2, pat1, pat2 = _axis_plan(op, out_slot)
    n1, n2 = g1.cube_count(), g2.cube_count()
    lin = idx1 * n2 + idx2
    w = weights * out_slot["scale"]
    if np.iscomplexobj(w):
        coeff = (
            np.bincount(lin, w.real, minlength=n1 * n2)
            + 1j * np.bincount(lin, w.imag, minlength=n1 * n2)
        ).reshape(n1, n2)
    else:
        coeff = np.bincount(lin, w, minlength=n1 * n2).reshape(n1, n2)
    return synthesize(coeff, g1, pat1, g2, pat2)


# -- serialization ----------------------------------------------------------------

_FMT = "dyadlab-coeffs/1"


def _grid_meta(grid: FactorGrid) -> dict:
    return {"axis": grid.axis, "bits": [list(row) for row in grid.bits]}


def _grid_from_meta(mesh: Mesh, meta: dict) -> FactorGrid:
    return FactorGrid(mesh, meta["axis"], tuple(tuple(r) for r in meta["bits"]))


def save_operator(path, op) -> None:
    mesh = op.mesh
    doc = {
        "format": _FMT,
        "mesh": {"n": mesh.n, "m": mesh.m, "L": mesh.level},
        "provenance": op.provenance,
    }
    if isinstance(op, PartialParaproduct):
        doc.update(
            kind="partial",
            shift_grid=_grid_meta(op.shift_grid),
            para_grid=_grid_meta(op.para_grid),
            complexity=list(op.complexity),
            type={"avg_slot": op.avg_slot, "haar_slot": op.haar_slot},
            entries=[
                {"K": int(k), "I": [int(x) for x in tri], "V": int(v), "value": float(a)}
                for k, tri, v, a in zip(op.K, op.I, op.V, op.values)
            ],
        )
    elif isinstance(op, FullParaproduct):
        doc.update(
            kind="full",
            grid1=_grid_meta(op.grid1),
            grid2=_grid_meta(op.grid2),
            type={"k_slot": op.k_slot, "v_slot": op.v_slot},
            entries=[
                {"K": int(k), "V": int(v), "value": float(a)}
                for k, v, a in zip(op.K, op.V, op.values)
            ],
        )
    elif isinstance(op, DyadicShiftBilinear):
        doc.update(
            kind="shift",
            grid1=_grid_meta(op.grid1),
            grid2=_grid_meta(op.grid2),
            complexity1=list(op.complexity1),
            complexity2=list(op.complexity2),
            tags1=list(op.tags1),
            tags2=list(op.tags2),
            entries=[
                {
                    "K": int(k),
                    "I": [int(x) for x in tri1],
                    "V": int(v),
                    "J": [int(x) for x in tri2],
                    "value": float(a),
                }
                for k, tri1, v, tri2, a in zip(op.K, op.I, op.V, op.J, op.values)
            ],
        )
    else:
        raise TypeError(f"not a model operator: {type(op).__name__}")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_operator(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _FMT:
        raise ValueError(f"{path}: not a {_FMT} file")
    mesh = Mesh(doc["mesh"]["n"], doc["mesh"]["m"], doc["mesh"]["L"])
    entries = doc["entries"]
    values = np.array([e["value"] for e in entries])
    if doc["kind"] == "partial":
        return PartialParaproduct(
            _grid_from_meta(mesh, doc["shift_grid"]),
            _grid_from_meta(mesh, doc["para_grid"]),
            tuple(doc["complexity"]),
            doc["type"]["avg_slot"],
            doc["type"]["haar_slot"],
            np.array([e["K"] for e in entries], dtype=int),
            np.array([e["I"] for e in entries], dtype=int).reshape(-1, 3),
            np.array([e["V"] for e in entries], dtype=int),
            values,
            provenance=doc.get("provenance", {}),
        )
    if doc["kind"] == "full":
        return FullParaproduct(
            _grid_from_meta(mesh, doc["grid1"]),
            _grid_from_meta(mesh, doc["grid2"]),
            doc["type"]["k_slot"],
            doc["type"]["v_slot"],
            np.array([e["K"] for e in entries], dtype=int),
            np.array([e["V"] for e in entries], dtype=int),
            values,
            provenance=doc.get("provenance", {}),
        )
    if doc["kind"] == "shift":
        return DyadicShiftBilinear(
            _grid_from_meta(mesh, doc["grid1"]),
            _grid_from_meta(mesh, doc["grid2"]),
            tuple(doc["complexity1"]),
            tuple(doc["complexity2"]),
            tuple(doc["tags1"]),
            tuple(doc["tags2"]),
            np.array([e["K"] for e in entries], dtype=int),
            np.array([e["I"] for e in entries], dtype=int).reshape(-1, 3),
            np.array([e["V"] for e in entries], dtype=int),
            np.array([e["J"] for e in entries], dtype=int).reshape(-1, 3),
            values,
            provenance=doc.get("provenance", {}),
        )
    raise ValueError(f"unknown operator kind {doc['kind']!r}")


# -- convenience builders ---------------------------------------------------------

def standard_grids(mesh: Mesh) -> tuple[FactorGrid, FactorGrid]:
    return standard_grid(mesh, 1), standard_grid(mesh, 2)


def shifted_grids(mesh: Mesh, shift1, shift2) -> tuple[FactorGrid, FactorGrid]:
    g1 = shifted_grid(mesh, shift1) if shift1 is not None else standard_grid(mesh, 1)
    g2 = shifted_grid(mesh, shift2) if shift2 is not None else standard_grid(mesh, 2)
    return g1, g2
