"""dyadlab: a numerical laboratory for bi-parameter dyadic harmonic analysis.

Model operators, norms, and commutator experiments on the discretized
torus [0,1)^(n+m): exact identities are verified to rounding accuracy and
operator-norm inequalities are estimated statistically over seeded random
ensembles.
"""

__version__ = "0.1.0"

from .mesh import (
    FactorFunction,
    GridFunction,
    Mesh,
    MeshMismatchError,
    ResolutionError,
    load_grid_function,
    save_grid_function,
    tensor_product,
)
from .grids import (
    DyadicCube,
    DyadicRectangle,
    FactorGrid,
    GridShift,
    HaarIndex,
    ancestor,
    children,
    enumerate_cubes,
    enumerate_shifts,
    grid_pair,
    sample_shift,
    shift_cube,
    shifted_grid,
    standard_grid,
    zero_shift,
)
from .signal import (
    average_projection,
    cube_average,
    delta_projection,
    haar_pair,
    haar_values,
    martingale_block,
    martingale_difference,
    pair,
    partial_pair,
)

__all__ = [name for name in dir() if not name.startswith("_")]
