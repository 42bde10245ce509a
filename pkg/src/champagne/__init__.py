"""Champagne subregions of the unit disc.

Construction of obstacle configurations (the unit disc minus many small
closed discs accumulating at the boundary), numerical evaluation of
unavoidability criteria, logarithmic-capacity estimation, and direct
Monte Carlo estimation of Brownian escape probabilities via
walk-on-spheres.
"""

__version__ = "0.1.0"

from .capacity import (
    AvoidabilityCertificate,
    C2Estimate,
    CapacityConstants,
    CapacityError,
    CapacityEstimate,
    ClippedDiscShape,
    DiscShape,
    SegmentShape,
    UnionShape,
    avoidability_certificate,
    c2_disc,
    c2_disc_system,
    c2_log_bound,
    cell_capacity_series,
    cell_capacity_weights,
    green_capacity_disc_bound,
    log_capacity,
    quasiadditivity_ratio,
)
from .criteria import (
    BoundaryPoint,
    BudgetSums,
    CriteriaError,
    SeparationReport,
    SeriesReport,
    affine_growth,
    budget_sums,
    count_centers_within,
    density_bounds,
    integral_test,
    log_weighted_series,
    poisson_series,
    separation,
    series_over_grid,
    shrink_for_separation,
)
from .generators import (
    AVOIDABLE_BUDGET,
    GeneratorError,
    GeneratorParams,
    MSpec,
    PhiSpec,
    generate_avoidable_ring,
    generate_phi_grid,
    generate_subsquares,
    shrink,
    truncate,
)
from .geometry import (
    Configuration,
    Disc,
    DiscBlock,
    GeometryError,
    Point,
    RingBlock,
    SpatialIndex,
    ValidationReport,
    WhitneyCell,
    WhitneyIndex,
    cell_center,
    cells_intersecting_disc,
    distance_to_obstacles,
    dumps_config,
    loads_config,
    validate_configuration,
    whitney_cell,
)
from .walker import (
    EscapeEstimate,
    WalkOutcome,
    WalkParams,
    WalkerError,
    annulus_escape_probability,
    concentric_obstacle_config,
    escape_vs_depth,
    estimate_escape,
    run_walk,
    wos_step,
)

__all__ = [
    "__version__",
    # geometry
    "Configuration",
    "Disc",
    "DiscBlock",
    "GeometryError",
    "Point",
    "RingBlock",
    "SpatialIndex",
    "ValidationReport",
    "WhitneyCell",
    "WhitneyIndex",
    "cell_center",
    "cells_intersecting_disc",
    "distance_to_obstacles",
    "dumps_config",
    "loads_config",
    "validate_configuration",
    "whitney_cell",
    # generators
    "AVOIDABLE_BUDGET",
    "GeneratorError",
    "GeneratorParams",
    "MSpec",
    "PhiSpec",
    "generate_avoidable_ring",
    "generate_phi_grid",
    "generate_subsquares",
    "shrink",
    "truncate",
    # criteria
    "BoundaryPoint",
    "BudgetSums",
    "CriteriaError",
    "SeparationReport",
    "SeriesReport",
    "affine_growth",
    "budget_sums",
    "count_centers_within",
    "density_bounds",
    "integral_test",
    "log_weighted_series",
    "poisson_series",
    "separation",
    "series_over_grid",
    "shrink_for_separation",
    # capacity
    "AvoidabilityCertificate",
    "C2Estimate",
    "CapacityConstants",
    "CapacityError",
    "CapacityEstimate",
    "ClippedDiscShape",
    "DiscShape",
    "SegmentShape",
    "UnionShape",
    "avoidability_certificate",
    "c2_disc",
    "c2_disc_system",
    "c2_log_bound",
    "cell_capacity_series",
    "cell_capacity_weights",
    "green_capacity_disc_bound",
    "log_capacity",
    "quasiadditivity_ratio",
    # walker
    "EscapeEstimate",
    "WalkOutcome",
    "WalkParams",
    "WalkerError",
    "annulus_escape_probability",
    "concentric_obstacle_config",
    "escape_vs_depth",
    "estimate_escape",
    "run_walk",
    "wos_step",
]
