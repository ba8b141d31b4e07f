"""Seeded samplers over random grid translations.

Expectations over translations are either Monte-Carlo (``count`` i.i.d.
draws from a seed) or exact (the full enumeration of the finite
translation space, 2^(level*d) points per factor).  Every sample point
carries a derived RNG so that per-translation random structure (e.g.
operator coefficients) is reproducible and independent across points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridShift, enumerate_shifts, sample_shift
from .mesh import Mesh


def _derived_rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, 0xD1AD, tag)))


@dataclass(frozen=True)
class ShiftSampler:
    """Sampler for one factor's translations."""

    mesh: Mesh
    axis: int
    count: int = 64
    seed: int = 0
    exact: bool = False

    def shifts(self) -> list[GridShift]:
        if self.exact:
            return enumerate_shifts(self.mesh, self.axis)
        if self.count < 1:
            raise ValueError("sampler needs at least one sample")
        rng = _derived_rng(self.seed, self.axis)
        return [sample_shift(rng, self.mesh, self.axis) for _ in range(self.count)]

    def rng(self, index: int) -> np.random.Generator:
        return _derived_rng(self.seed, (self.axis << 20) + index)


@dataclass(frozen=True)
class PairSampler:
    """Sampler for joint translations of both factors."""

    mesh: Mesh
    count: int = 64
    seed: int = 0
    exact: bool = False

    def pairs(self) -> list[tuple[GridShift, GridShift]]:
        if self.exact:
            return [
                (s1, s2)
                for s1 in enumerate_shifts(self.mesh, 1)
                for s2 in enumerate_shifts(self.mesh, 2)
            ]
        if self.count < 1:
            raise ValueError("sampler needs at least one sample")
        rng = _derived_rng(self.seed, 3)
        return [
            (sample_shift(rng, self.mesh, 1), sample_shift(rng, self.mesh, 2))
            for _ in range(self.count)
        ]

    def rng(self, index: int) -> np.random.Generator:
        return _derived_rng(self.seed, (3 << 20) + index)
