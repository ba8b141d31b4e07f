"""Cellwise-constant functions on the torus [0,1)^(n+m).

The domain is a product of two factors: the first factor has ``n``
coordinates, the second ``m`` (n, m in {1, 2}).  Every coordinate axis is
split into 2^level half-open cells, and all functions are constant on
cells, so integrals are exact finite sums (cell sum times cell volume).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MeshMismatchError(ValueError):
    """Two functions or indices do not share the same mesh."""


class ResolutionError(ValueError):
    """A request goes below the finest representable dyadic scale."""


MAX_LEVEL = 12


@dataclass(frozen=True)
class Mesh:
    """Dyadic discretization of [0,1)^(n+m) at mesh scale 2^-level."""

    n: int = 1
    m: int = 1
    level: int = 5

    def __post_init__(self) -> None:
        if self.n not in (1, 2) or self.m not in (1, 2):
            raise ValueError(f"factor dimensions must be 1 or 2, got n={self.n}, m={self.m}")
        if not 1 <= self.level <= MAX_LEVEL:
            raise ValueError(f"level must be in [1, {MAX_LEVEL}], got {self.level}")

    @property
    def cells(self) -> int:
        """Cells per coordinate axis."""
        return 1 << self.level

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * (self.n + self.m)

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.level * (self.n + self.m))

    def factor_dim(self, axis: int) -> int:
        _check_axis(axis)
        return self.n if axis == 1 else self.m

    def factor_axes(self, axis: int) -> tuple[int, ...]:
        """Positions of the factor's coordinates in the value array."""
        _check_axis(axis)
        return tuple(range(self.n)) if axis == 1 else tuple(range(self.n, self.n + self.m))

    def factor_shape(self, axis: int) -> tuple[int, ...]:
        return (self.cells,) * self.factor_dim(axis)

    def factor_cells(self, axis: int) -> int:
        return self.cells ** self.factor_dim(axis)

    def factor_cell_volume(self, axis: int) -> float:
        return 2.0 ** (-self.level * self.factor_dim(axis))

    @property
    def transposed(self) -> "Mesh":
        return Mesh(self.m, self.n, self.level)


def _check_axis(axis: int) -> None:
    if axis not in (1, 2):
        raise ValueError(f"factor axis must be 1 or 2, got {axis}")


def _as_values(values, shape) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != shape:
        raise MeshMismatchError(f"value array has shape {arr.shape}, mesh wants {shape}")
    if arr.dtype.kind not in "fc":
        arr = arr.astype(np.float64)
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GridFunction:
    """A function on the full product torus, one value per mesh cell."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_values(self.values, self.mesh.shape))

    # -- algebra -----------------------------------------------------------
    def _binary(self, other, op) -> "GridFunction":
        if isinstance(other, GridFunction):
            if other.mesh != self.mesh:
                raise MeshMismatchError("grid functions live on different meshes")
            return GridFunction(self.mesh, op(self.values, other.values))
        return GridFunction(self.mesh, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return GridFunction(self.mesh, np.subtract(other, self.values))

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return GridFunction(self.mesh, self.values / scalar)

    def __neg__(self):
        return GridFunction(self.mesh, -self.values)

    def __abs__(self):
        return GridFunction(self.mesh, np.abs(self.values))

    # -- calculus ----------------------------------------------------------
    def integral(self) -> complex | float:
        return self.values.sum() * self.mesh.cell_volume

    def mean(self) -> complex | float:
        return self.values.mean()

    def transpose(self) -> "GridFunction":
        k = self.mesh.n
        order = tuple(range(k, k + self.mesh.m)) + tuple(range(k))
        return GridFunction(self.mesh.transposed, np.transpose(self.values, order))

    @staticmethod
    def constant(mesh: Mesh, value=1.0) -> "GridFunction":
        return GridFunction(mesh, np.full(mesh.shape, value))

    @staticmethod
    def zeros(mesh: Mesh) -> "GridFunction":
        return GridFunction(mesh, np.zeros(mesh.shape))


@dataclass(frozen=True)
class FactorFunction:
    """A function of one factor variable only (e.g. a partial pairing)."""

    mesh: Mesh
    axis: int
    values: np.ndarray

    def __post_init__(self) -> None:
        _check_axis(self.axis)
        object.__setattr__(self, "values", _as_values(self.values, self.mesh.factor_shape(self.axis)))

    def _binary(self, other, op) -> "FactorFunction":
        if isinstance(other, FactorFunction):
            if other.mesh != self.mesh or other.axis != self.axis:
                raise MeshMismatchError("factor functions live on different factors")
            return FactorFunction(self.mesh, self.axis, op(self.values, other.values))
        return FactorFunction(self.mesh, self.axis, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FactorFunction(self.mesh, self.axis, self.values / scalar)

    def __neg__(self):
        return FactorFunction(self.mesh, self.axis, -self.values)

    def __abs__(self):
        return FactorFunction(self.mesh, self.axis, np.abs(self.values))

    def integral(self) -> complex | float:
        return self.values.sum() * self.mesh.factor_cell_volume(self.axis)

    def broadcast(self) -> np.ndarray:
        """View of the values broadcastable over the full mesh shape."""
        d1, d2 = self.mesh.n, self.mesh.m
        if self.axis == 1:
            shape = self.values.shape + (1,) * d2
        else:
            shape = (1,) * d1 + self.values.shape
        return self.values.reshape(shape)

    def extend(self) -> GridFunction:
        """The function viewed on the whole product domain."""
        return GridFunction(self.mesh, np.broadcast_to(self.broadcast(), self.mesh.shape).copy())

    @staticmethod
    def constant(mesh: Mesh, axis: int, value=1.0) -> "FactorFunction":
        return FactorFunction(mesh, axis, np.full(mesh.factor_shape(axis), value))


def tensor_product(u: FactorFunction, v: FactorFunction) -> GridFunction:
    """u(x1) v(x2) as a function on the product domain."""
    if u.mesh != v.mesh:
        raise MeshMismatchError("tensor factors live on different meshes")
    if {u.axis, v.axis} != {1, 2}:
        raise ValueError("tensor_product needs one function per factor")
    first, second = (u, v) if u.axis == 1 else (v, u)
    return GridFunction(u.mesh, first.broadcast() * second.broadcast())


# -- serialization ----------------------------------------------------------
#
# Text format "dyadlab-gridfn 1": two header lines, then one cell value per
# line in C (row-major) order.  Re/im parts are separate columns for complex
# data.  %.17g round-trips IEEE doubles exactly.

_FMT_NAME = "dyadlab-gridfn"
_FMT_VERSION = 1


def save_grid_function(path, f: GridFunction) -> None:
    dtype = "complex" if f.values.dtype.kind == "c" else "float"
    with open(path, "w") as fh:
        fh.write(f"# {_FMT_NAME} {_FMT_VERSION}\n")
        fh.write(f"# n={f.mesh.n} m={f.mesh.m} L={f.mesh.level} dtype={dtype}\n")
        flat = f.values.ravel()
        if dtype == "complex":
            for z in flat:
                fh.write("%.17g,%.17g\n" % (z.real, z.imag))
        else:
            for x in flat:
                fh.write("%.17g\n" % x)


def load_grid_function(path) -> GridFunction:
    with open(path) as fh:
        magic = fh.readline().split()
        if len(magic) != 3 or magic[1] != _FMT_NAME:
            raise ValueError(f"{path}: not a {_FMT_NAME} file")
        if int(magic[2]) != _FMT_VERSION:
            raise ValueError(f"{path}: unsupported format version {magic[2]}")
        fields = dict(tok.split("=") for tok in fh.readline().lstrip("# ").split())
        mesh = Mesh(int(fields["n"]), int(fields["m"]), int(fields["L"]))
        rows = [line.strip() for line in fh if line.strip()]
    if fields["dtype"] == "complex":
        parts = np.array([[float(a), float(b)] for a, b in (r.split(",") for r in rows)])
        values = (parts[:, 0] + 1j * parts[:, 1]).reshape(mesh.shape)
    else:
        values = np.array([float(r) for r in rows]).reshape(mesh.shape)
    return GridFunction(mesh, values)
