"""Boundary tracing for nonconvex image sets via cone scalarization sweeps."""

from .funcspace import GridFunction, cb_h_value, cb_scaling_factor, l2_h_value
from .geometry import (
    CLOSED,
    PARTIALLY_OPEN,
    ConeSpec,
    cone_contains,
    exterior_cone_holds,
    unit_sphere_grid,
)
from .oracle import (
    BoundaryCloud,
    BoundaryPoint,
    OccupancyGrid,
    hausdorff,
    image_cloud,
    nearest_distances,
    occupancy_boundary,
)
from .problems import (
    BUILTINS,
    Problem,
    annulus,
    bean,
    disk,
    expression_problem,
    load_problem,
    nonconvex_2d,
    polygon,
)
from .reduction import (
    ComponentBounds,
    InfeasibleBox,
    ParamBox,
    component_bounds,
    default_pivot,
    parameter_range,
    parameter_range_intersection,
    sample_param_grid,
)
from .scalarization import (
    ScalarizationParams,
    ScalarValueReport,
    h_value,
    is_boundary_witness,
    phi,
    theta,
    value,
)
from .solver import (
    MaximizeResult,
    SolverConfig,
    SolverError,
    maximize,
    orthonormal_complement,
    two_stage_maximize,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTINS",
    "BoundaryCloud",
    "BoundaryPoint",
    "CLOSED",
    "ComponentBounds",
    "ConeSpec",
    "GridFunction",
    "InfeasibleBox",
    "MaximizeResult",
    "OccupancyGrid",
    "PARTIALLY_OPEN",
    "ParamBox",
    "Problem",
    "ScalarValueReport",
    "ScalarizationParams",
    "SolverConfig",
    "SolverError",
    "annulus",
    "bean",
    "cb_h_value",
    "cb_scaling_factor",
    "component_bounds",
    "cone_contains",
    "default_pivot",
    "disk",
    "expression_problem",
    "exterior_cone_holds",
    "h_value",
    "hausdorff",
    "image_cloud",
    "is_boundary_witness",
    "l2_h_value",
    "load_problem",
    "maximize",
    "nearest_distances",
    "nonconvex_2d",
    "occupancy_boundary",
    "orthonormal_complement",
    "parameter_range",
    "parameter_range_intersection",
    "phi",
    "polygon",
    "sample_param_grid",
    "theta",
    "two_stage_maximize",
    "unit_sphere_grid",
    "value",
]
