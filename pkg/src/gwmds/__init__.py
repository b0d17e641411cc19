"""Multi-view dimensionality reduction with Gromov-Wasserstein couplings.

Mean-GWMDS embeds the average of the views' relational matrices;
Multi-GWMDS fits one shared embedding with a coupling per view and keeps
the aligned candidate that agrees best with all views.
"""

__version__ = "0.1.0"

from .estimators import GWMDS, MeanGWMDS, MultiGWMDS, MultiIsomap
from .geometry import (
    DisconnectedGraphError,
    Embedding,
    ManifoldSample,
    NeighborGraph,
    classical_mds,
    dataset_distances,
    generate_manifold,
    geodesic_distances,
    knn_graph,
    make_views,
    multi_isomap,
)
from .gw import (
    ConvergenceError,
    GwConfig,
    GwResult,
    MdsConfig,
    barycentric_align,
    conditional_gradient,
    gw_distance,
    gw_gradient_embedding,
    gw_objective,
    gwmds_embed,
)
from .ingest import EldParseError, LoadSeries, daily_views, default_dates, load_eld
from .multiview import (
    MultiGwResult,
    ViewWeights,
    joint_objective,
    mean_gwmds,
    multi_gwmds,
    multi_gwmds_optimize,
    select_representative,
)
from .ot import Coupling, OTError, solve_entropic_ot, solve_exact_ot, wasserstein_p
from .relational import (
    DegenerateInputError,
    MultiViewDataset,
    RelationalMatrix,
    SampleMatrix,
    distance_correlation,
    mean_relational,
    pairwise_euclidean,
)

__all__ = [
    "GWMDS",
    "MeanGWMDS",
    "MultiGWMDS",
    "MultiIsomap",
    "DisconnectedGraphError",
    "Embedding",
    "ManifoldSample",
    "NeighborGraph",
    "classical_mds",
    "dataset_distances",
    "generate_manifold",
    "geodesic_distances",
    "knn_graph",
    "make_views",
    "multi_isomap",
    "ConvergenceError",
    "GwConfig",
    "GwResult",
    "MdsConfig",
    "barycentric_align",
    "conditional_gradient",
    "gw_distance",
    "gw_gradient_embedding",
    "gw_objective",
    "gwmds_embed",
    "EldParseError",
    "LoadSeries",
    "daily_views",
    "default_dates",
    "load_eld",
    "MultiGwResult",
    "ViewWeights",
    "joint_objective",
    "mean_gwmds",
    "multi_gwmds",
    "multi_gwmds_optimize",
    "select_representative",
    "Coupling",
    "OTError",
    "solve_entropic_ot",
    "solve_exact_ot",
    "wasserstein_p",
    "DegenerateInputError",
    "MultiViewDataset",
    "RelationalMatrix",
    "SampleMatrix",
    "distance_correlation",
    "mean_relational",
    "pairwise_euclidean",
]
