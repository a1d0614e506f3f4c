"""Statistics on the metric space of persistence diagrams.

Distances between diagrams (Wasserstein, bottleneck), Frechet means via
groupings, the probabilistic Frechet mean as a measure over diagrams,
continuity diagnostics for time-varying diagrams, and a small Vietoris-Rips
engine for generating example diagrams from point clouds.
"""

__version__ = "0.1.0"

from .diagrams import (
    BoxBound,
    Diagram,
    DiagramSet,
    PlanePoint,
    diagonal_distance,
    diameter_bound,
    from_rotated,
    in_box,
    to_rotated,
)
from .frechet import FrechetResult, frechet_mean, matchings_to_grouping
from .grouping import (
    Grouping,
    Selection,
    canonicalize,
    enumerate_groupings,
    frechet_function,
    grouping_cost,
    grouping_mean,
    selection_cost,
    selection_mean,
    trivial_selection,
)
from .matching import (
    DIAGONAL,
    Matching,
    MetricParams,
    bottleneck,
    build_cost_matrix,
    solve_assignment,
    wasserstein,
)
from .measure import (
    TransportPlan,
    holder_constants,
    mc_slack,
    measure_wasserstein,
    product_metric,
)
from .pfm import (
    DiagramMeasure,
    LabeledDraw,
    MeasureAtom,
    PerturbParams,
    lift_grouping,
    optimal_grouping,
    perturb_point,
    pfm,
)
from .rips import (
    PointCloud,
    build_rips,
    persistence,
    sample_annulus,
    sample_circle,
    sample_double_annulus,
)
from .vineyard import (
    ContinuityReport,
    Vineyard,
    continuity_report,
    make_square_crossing,
    vineyard_pfm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
