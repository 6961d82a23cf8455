"""Exact arithmetic-combinatorics laboratory on the dyadic grid.

Sets are finite unions of cells at scale 2**-m; every covering number,
energy, and incidence count is computed in integer arithmetic so inequality
chains can be asserted rather than estimated.
"""

from .content import ContentResult, ContentResult2D, dyadic_content, dyadic_content_2d
from .energy import (
    FiberCounts,
    LevelDecomposition,
    LevelSet,
    PopularSet,
    RichSet,
    delta_power,
    dyadic_level_sets,
    energy,
    fiber_counts,
    popular_set,
    quadruple_count,
    rich_elements,
)
from .generators import GenerationError, GeneratorSpec, ap_set, cantor_set, random_frostman
from .grid import (
    DyadicCell,
    DyadicSquare,
    GridSet,
    GridSet2D,
    affine_image,
    arithmetic,
    invert,
    maximal_separated_subset,
    negate,
    neighborhood,
)
from .incidence import (
    Shading,
    Tube,
    TubeFamily,
    build_shading,
    build_tube_family,
    count_incidences,
    representation_count,
    theorem_bound_ratio,
)
from .regularity import (
    BoxDimEstimate,
    BranchingProfile,
    FrostmanReport,
    SigmaReport,
    box_dim_estimate,
    branching_profile,
    frostman_constant,
    sigma_exponent,
)
from .uniformize import (
    UniformCertificate,
    UniformityCheck,
    extract_uniform,
    is_uniform,
    ladder_levels,
    ladder_period,
    partition_uniform,
    solve_T_eps,
)

__version__ = "0.1.0"

__all__ = [
    "ContentResult",
    "ContentResult2D",
    "dyadic_content",
    "dyadic_content_2d",
    "FiberCounts",
    "LevelDecomposition",
    "LevelSet",
    "PopularSet",
    "RichSet",
    "delta_power",
    "dyadic_level_sets",
    "energy",
    "fiber_counts",
    "popular_set",
    "quadruple_count",
    "rich_elements",
    "GenerationError",
    "GeneratorSpec",
    "ap_set",
    "cantor_set",
    "random_frostman",
    "DyadicCell",
    "DyadicSquare",
    "GridSet",
    "GridSet2D",
    "affine_image",
    "arithmetic",
    "invert",
    "maximal_separated_subset",
    "negate",
    "neighborhood",
    "Shading",
    "Tube",
    "TubeFamily",
    "build_shading",
    "build_tube_family",
    "count_incidences",
    "representation_count",
    "theorem_bound_ratio",
    "BoxDimEstimate",
    "BranchingProfile",
    "FrostmanReport",
    "SigmaReport",
    "box_dim_estimate",
    "branching_profile",
    "frostman_constant",
    "sigma_exponent",
    "UniformCertificate",
    "UniformityCheck",
    "extract_uniform",
    "is_uniform",
    "ladder_levels",
    "ladder_period",
    "partition_uniform",
    "solve_T_eps",
]
