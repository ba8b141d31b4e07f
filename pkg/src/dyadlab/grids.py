"""Dyadic grids on the torus, random shifts, and cube arithmetic.

A grid on one factor keeps the scales 2^-level, ..., 1: the top cube is
the whole factor torus and the finest cubes are single mesh cells.  A
shifted grid translates the level-j tiling by

    t_j = sum_{i > j} 2^-i * w_i            (per coordinate, mod 1)

where w_i in {0,1}^d is the shift bit vector at scale i.  Only scales
1 <= i <= level are stored, so shifted grids stay mesh-aligned and all
pairings remain exact.  Shifted cubes may wrap around the torus.

Shifting is the cube translation I -> I + t_level(I).  Ancestors and
children are always taken inside the cube's own (possibly shifted) grid;
the translation map does not intertwine the parent relation of the
standard grid with that of the shifted grid (adding t_j versus t_{j-k}
can cross a tile boundary), so ``ancestor(shift_cube(I), k)`` and
``shift_cube(ancestor(I, k))`` genuinely differ for some shifts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, MeshMismatchError, ResolutionError, _check_axis

Bits = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class GridShift:
    """Random translation data for one factor: one bit vector per scale."""

    axis: int
    bits: Bits  # bits[i-1] is the {0,1}^d vector at scale i, i = 1..level

    def __post_init__(self) -> None:
        _check_axis(self.axis)
        object.__setattr__(self, "bits", tuple(tuple(int(b) for b in row) for row in self.bits))
        if any(b not in (0, 1) for row in self.bits for b in row):
            raise ValueError("shift bits must be 0 or 1")

    @property
    def level(self) -> int:
        return len(self.bits)

    def total_translation(self) -> tuple[float, ...]:
        """sum_i 2^-i w_i per coordinate, a point of [0,1)^d."""
        d = len(self.bits[0]) if self.bits else 1
        return tuple(
            sum(2.0 ** -(i + 1) * row[c] for i, row in enumerate(self.bits)) for c in range(d)
        )


def zero_shift(mesh: Mesh, axis: int) -> GridShift:
    d = mesh.factor_dim(axis)
    return GridShift(axis, tuple((0,) * d for _ in range(mesh.level)))


def sample_shift(rng: np.random.Generator, mesh: Mesh, axis: int) -> GridShift:
    """Draw every stored bit i.i.d. uniform on {0,1}."""
    d = mesh.factor_dim(axis)
    raw = rng.integers(0, 2, size=(mesh.level, d))
    return GridShift(axis, tuple(tuple(int(b) for b in row) for row in raw))


def enumerate_shifts(mesh: Mesh, axis: int) -> list[GridShift]:
    """All 2^(level*d) shifts of one factor, in lexicographic bit order."""
    d = mesh.factor_dim(axis)
    nbits = mesh.level * d
    if nbits > 24:
        raise ValueError(f"refusing to enumerate 2^{nbits} shifts")
    out = []
    for code in range(1 << nbits):
        flat = [(code >> k) & 1 for k in range(nbits)]
        rows = tuple(tuple(flat[i * d : (i + 1) * d]) for i in range(mesh.level))
        out.append(GridShift(axis, rows))
    return out


@dataclass(frozen=True)
class FactorGrid:
    """A (possibly shifted) truncated dyadic grid on one factor."""

    mesh: Mesh
    axis: int
    bits: Bits

    def __post_init__(self) -> None:
        _check_axis(self.axis)
        if len(self.bits) != self.mesh.level:
            raise ValueError("need one bit vector per scale 1..level")
        d = self.dim
        if any(len(row) != d for row in self.bits):
            raise ValueError(f"shift bit vectors must have dimension {d}")

    @property
    def dim(self) -> int:
        return self.mesh.factor_dim(self.axis)

    @property
    def level_max(self) -> int:
        return self.mesh.level

    @property
    def is_standard(self) -> bool:
        return all(b == 0 for row in self.bits for b in row)

    def translation(self, level: int) -> tuple[int, ...]:
        """Mesh-unit translation of the level-j tiling: sum_{i>j} 2^(L-i) w_i."""
        L = self.mesh.level
        return tuple(
            sum((1 << (L - i)) * self.bits[i - 1][c] for i in range(level + 1, L + 1))
            for c in range(self.dim)
        )

    # -- cube bookkeeping --------------------------------------------------
    def cube_count(self, level: int | None = None) -> int:
        d = self.dim
        if level is not None:
            return 1 << (level * d)
        return sum(1 << (j * d) for j in range(self.mesh.level + 1))

    def _level_base(self, level: int) -> int:
        d = self.dim
        return sum(1 << (j * d) for j in range(level))

    def cube(self, level: int, tile: tuple[int, ...]) -> "DyadicCube":
        if not 0 <= level <= self.mesh.level:
            raise ResolutionError(f"level {level} outside 0..{self.mesh.level}")
        side = 1 << (self.mesh.level - level)
        t = self.translation(level)
        cells = self.mesh.cells
        offset = tuple((t[c] + tile[c] * side) % cells for c in range(self.dim))
        return DyadicCube(self, level, offset)

    def cube_index(self, cube: "DyadicCube") -> int:
        """Flat index: levels stacked coarse to fine, row-major tiles."""
        tile = cube.tile
        flat = 0
        for k in tile:
            flat = flat * (1 << cube.level) + k
        return self._level_base(cube.level) + flat

    def cube_by_index(self, index: int) -> "DyadicCube":
        d = self.dim
        level = 0
        while index >= (1 << (level * d)):
            index -= 1 << (level * d)
            level += 1
        tile = []
        for _ in range(d):
            tile.append(index % (1 << level))
            index //= 1 << level
        return self.cube(level, tuple(reversed(tile)))

    def cubes(self, level: int) -> list["DyadicCube"]:
        return [self.cube(level, tile) for tile in itertools.product(range(1 << level), repeat=self.dim)]

    def all_cubes(self) -> list["DyadicCube"]:
        return [c for j in range(self.mesh.level + 1) for c in self.cubes(j)]

    def top(self) -> "DyadicCube":
        return self.cube(0, (0,) * self.dim)


def standard_grid(mesh: Mesh, axis: int) -> FactorGrid:
    return FactorGrid(mesh, axis, zero_shift(mesh, axis).bits)


def shifted_grid(mesh: Mesh, shift: GridShift) -> FactorGrid:
    if shift.level != mesh.level:
        raise ValueError("shift was sampled at a different resolution")
    return FactorGrid(mesh, shift.axis, shift.bits)


def grid_pair(
    mesh: Mesh, shift1: GridShift | None = None, shift2: GridShift | None = None
) -> tuple[FactorGrid, FactorGrid]:
    g1 = standard_grid(mesh, 1) if shift1 is None else shifted_grid(mesh, shift1)
    g2 = standard_grid(mesh, 2) if shift2 is None else shifted_grid(mesh, shift2)
    if g1.axis != 1 or g2.axis != 2:
        raise ValueError("grid_pair wants an axis-1 shift then an axis-2 shift")
    return g1, g2


@dataclass(frozen=True)
class DyadicCube:
    """A dyadic cube of one factor, side 2^-level, possibly wrapped mod 1."""

    grid: FactorGrid
    level: int
    offset: tuple[int, ...]  # left endpoints in mesh units, each in [0, 2^L)

    def __post_init__(self) -> None:
        L = self.grid.mesh.level
        if not 0 <= self.level <= L:
            raise ResolutionError(f"cube level {self.level} outside 0..{L}")
        object.__setattr__(self, "offset", tuple(int(o) % self.grid.mesh.cells for o in self.offset))
        if len(self.offset) != self.grid.dim:
            raise ValueError("offset dimension does not match the grid")
        side = self.side_cells
        t = self.grid.translation(self.level)
        if any((o - tc) % side for o, tc in zip(self.offset, t)):
            raise ValueError(f"offset {self.offset} is not aligned to the level-{self.level} tiling")

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def side_cells(self) -> int:
        return 1 << (self.grid.mesh.level - self.level)

    @property
    def side_length(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def volume(self) -> float:
        return 2.0 ** (-self.level * self.dim)

    @property
    def tile(self) -> tuple[int, ...]:
        t = self.grid.translation(self.level)
        return tuple(
            ((o - tc) % self.grid.mesh.cells) // self.side_cells for o, tc in zip(self.offset, t)
        )

    def coord_cells(self) -> list[np.ndarray]:
        """Mesh-cell indices covered along each coordinate (wrap-aware)."""
        cells = self.grid.mesh.cells
        return [(o + np.arange(self.side_cells)) % cells for o in self.offset]

    def wraps(self) -> bool:
        cells = self.grid.mesh.cells
        return any(o + self.side_cells > cells for o in self.offset)

    def contains(self, other: "DyadicCube") -> bool:
        """Set containment mod 1 (grids may differ)."""
        if other.level < self.level:
            return False
        cells = self.grid.mesh.cells
        for o_out, o_in in zip(self.offset, other.offset):
            if (o_in - o_out) % cells + other.side_cells > self.side_cells:
                return False
        return True

    def indicator(self) -> np.ndarray:
        """0/1 array over the factor's cells."""
        shape = self.grid.mesh.factor_shape(self.grid.axis)
        out = np.zeros(shape)
        out[np.ix_(*self.coord_cells())] = 1.0
        return out


def enumerate_cubes(grid: FactorGrid, level: int) -> list[DyadicCube]:
    """The 2^(level*d) cubes tiling the factor torus at one scale."""
    if level > grid.mesh.level:
        raise ResolutionError(f"level {level} exceeds resolution {grid.mesh.level}")
    if level < 0:
        raise ResolutionError("level must be nonnegative")
    return grid.cubes(level)


def ancestor(cube: DyadicCube, k: int) -> DyadicCube:
    """The unique cube S of the same grid with cube ⊂ S, ℓ(S) = 2^k ℓ(cube)."""
    if k < 0:
        raise ValueError("ancestor depth must be nonnegative")
    if k > cube.level:
        raise ResolutionError(f"no depth-{k} ancestor above level {cube.level} in the truncated grid")
    if k == 0:
        return cube
    level = cube.level - k
    grid = cube.grid
    t = grid.translation(level)
    cells = grid.mesh.cells
    side = 1 << (grid.mesh.level - level)
    offset = tuple(
        (tc + ((o - tc) % cells) // side * side) % cells for o, tc in zip(cube.offset, t)
    )
    return DyadicCube(grid, level, offset)


def children(cube: DyadicCube) -> tuple[DyadicCube, ...]:
    """The 2^d half-cubes, ordered per coordinate (start-half first)."""
    if cube.level >= cube.grid.mesh.level:
        raise ResolutionError("cube at the finest level has no children in the grid")
    half = cube.side_cells >> 1
    cells = cube.grid.mesh.cells
    out = []
    for pattern in itertools.product((0, 1), repeat=cube.dim):
        offset = tuple((o + p * half) % cells for o, p in zip(cube.offset, pattern))
        out.append(DyadicCube(cube.grid, cube.level + 1, offset))
    return tuple(out)


def shift_cube(cube: DyadicCube, shift: GridShift) -> DyadicCube:
    """Translate a standard-grid cube into the shifted grid (mod 1)."""
    if not cube.grid.is_standard:
        raise ValueError("shift_cube starts from the standard grid")
    if shift.axis != cube.grid.axis:
        raise ValueError("shift axis does not match the cube's axis")
    target = shifted_grid(cube.grid.mesh, shift)
    t = target.translation(cube.level)
    cells = cube.grid.mesh.cells
    offset = tuple((o + tc) % cells for o, tc in zip(cube.offset, t))
    return DyadicCube(target, cube.level, offset)


@dataclass(frozen=True)
class DyadicRectangle:
    """A product of one cube per factor."""

    first: DyadicCube
    second: DyadicCube

    def __post_init__(self) -> None:
        if self.first.grid.axis != 1 or self.second.grid.axis != 2:
            raise ValueError("rectangle wants an axis-1 cube then an axis-2 cube")
        if self.first.grid.mesh != self.second.grid.mesh:
            raise MeshMismatchError("rectangle factors live on different meshes")

    @property
    def area(self) -> float:
        return self.first.volume * self.second.volume

    def contains(self, other: "DyadicRectangle") -> bool:
        return self.first.contains(other.first) and self.second.contains(other.second)

    def indicator(self) -> np.ndarray:
        return np.multiply.outer(self.first.indicator(), self.second.indicator())


@dataclass(frozen=True)
class HaarIndex:
    """A cube plus a sign pattern: 0 = averaging factor, 1 = oscillating."""

    cube: DyadicCube
    eta: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "eta", tuple(int(e) for e in self.eta))
        if len(self.eta) != self.cube.dim:
            raise ValueError("sign pattern length must match the cube dimension")
        if any(e not in (0, 1) for e in self.eta):
            raise ValueError("sign pattern entries must be 0 or 1")
        if any(self.eta) and self.cube.level >= self.cube.grid.mesh.level:
            raise ResolutionError("no oscillating factor exists at the finest level")

    @property
    def cancellative(self) -> bool:
        return any(self.eta)

    @property
    def pattern(self) -> int:
        code = 0
        for c, e in enumerate(self.eta):
            code |= e << c
        return code


def cancellative_patterns(dim: int) -> list[tuple[int, ...]]:
    """All sign patterns with at least one oscillating coordinate."""
    return [p for p in itertools.product((0, 1), repeat=dim) if any(p)]
