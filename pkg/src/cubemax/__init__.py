"""Harmonic analysis and maximal operators on the Boolean hypercube."""

from .cube import (
    CubeFunction,
    SphereSumMatrix,
    antipode,
    level_energies,
    lp_norm,
    read_cube_function,
    sphere_means_all,
    sphere_sums,
    wht,
    write_cube_function,
)
from .estimators import (
    MarkingAdversary,
    MaximalNormEstimator,
    MaximalTransformer,
    WalshHadamardTransformer,
)
from .exceptions import (
    CapacityError,
    CubemaxError,
    DimensionMismatchError,
    DomainError,
    NumericalResolutionError,
    RepresentationError,
)
from .krawtchouk import KrawtchoukTable, build_table, decay_constants
from .maximal import maximal_apply, norm2_ascent, norm2_exhaustive_small
from .radial import OperatorFamily, RadialOperator, apply, spherical_family
from .reports import CLAIMS, CheckReport

__all__ = [
    "CubeFunction",
    "SphereSumMatrix",
    "antipode",
    "level_energies",
    "lp_norm",
    "read_cube_function",
    "sphere_means_all",
    "sphere_sums",
    "wht",
    "write_cube_function",
    "MarkingAdversary",
    "MaximalNormEstimator",
    "MaximalTransformer",
    "WalshHadamardTransformer",
    "CapacityError",
    "CubemaxError",
    "DimensionMismatchError",
    "DomainError",
    "NumericalResolutionError",
    "RepresentationError",
    "KrawtchoukTable",
    "build_table",
    "decay_constants",
    "maximal_apply",
    "norm2_ascent",
    "norm2_exhaustive_small",
    "OperatorFamily",
    "RadialOperator",
    "apply",
    "spherical_family",
    "CLAIMS",
    "CheckReport",
]
