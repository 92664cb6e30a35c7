"""Topological summaries of point clouds with a statistical layer.

Estimators evaluated on grids, persistent homology of grid and Rips
filtrations, diagram distances, landscapes and silhouettes, bootstrap
confidence bands and density cluster trees.
"""

from tdakit.errors import InputError, NumericDomainError, TDAError
from tdakit.estimators import (
    EvaluationGrid,
    ScalarField,
    dist_fct,
    dtm,
    kde,
    kernel_dist,
    knn_de,
    make_grid,
)
from tdakit.filtration import Filtration, build_grid_filtration, build_rips_filtration
from tdakit.persistence import (
    PersistenceDiagram,
    extract_diagram,
    grid_diag,
    reduce_boundary_matrix,
    rips_diag,
)
from tdakit.metrics import bottleneck, wasserstein
from tdakit.summaries import landscape, silhouette, triangle
from tdakit.statistics import (
    ConfidenceBand,
    MaxPersistenceResult,
    bootstrap_band,
    max_persistence,
    multip_bootstrap,
    significant_features,
)
from tdakit.clustering import ClusterTree, cluster_tree

__version__ = "0.1.0"

__all__ = [
    "ClusterTree",
    "ConfidenceBand",
    "EvaluationGrid",
    "Filtration",
    "InputError",
    "MaxPersistenceResult",
    "NumericDomainError",
    "PersistenceDiagram",
    "ScalarField",
    "TDAError",
    "bootstrap_band",
    "bottleneck",
    "build_grid_filtration",
    "build_rips_filtration",
    "cluster_tree",
    "dist_fct",
    "dtm",
    "extract_diagram",
    "grid_diag",
    "kde",
    "kernel_dist",
    "knn_de",
    "landscape",
    "make_grid",
    "max_persistence",
    "multip_bootstrap",
    "reduce_boundary_matrix",
    "rips_diag",
    "significant_features",
    "silhouette",
    "triangle",
    "wasserstein",
]
