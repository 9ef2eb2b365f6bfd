"""Spatial microenvironment discovery for per-cell omics tables.

Featurize each cell's spatial neighborhood (expression quantiles plus
geometric-graph statistics), embed the featurization in 2-D, cluster it, and
explore the result through linked interactive views.
"""

from .assemble import NeighborhoodMatrix, assemble
from .cluster import ClusterModel, kmeans, spatial_contiguity
from .data import (
    CellTable,
    ColumnSchema,
    Matrix,
    load_cells_csv,
    read_matrix_csv,
    write_cells_csv,
    write_matrix_csv,
)
from .embedding import EmbeddingResult, EmbedParams, embed
from .errors import FormatError, MicroenvError, SchemaError, ValidationError
from .graphstats import (
    NeighborhoodGraph,
    StatRegistry,
    build_graph,
    compute_network_features,
    default_registry,
    network_matrix,
)
from .neighbors import Neighborhood, SpatialIndex, build_index, neighborhood_of
from .pca import PcaModel, fit_pca, pca_transform
from .quantiles import FeatureBlock, QuantileSpec, quantile_matrix, quantiles_of
from .sim import ComparisonReport, SimulationParams, run_comparison, simulate

__version__ = "0.1.0"

__all__ = [
    "CellTable",
    "ClusterModel",
    "ColumnSchema",
    "ComparisonReport",
    "EmbedParams",
    "EmbeddingResult",
    "FeatureBlock",
    "FormatError",
    "Matrix",
    "MicroenvError",
    "Neighborhood",
    "NeighborhoodGraph",
    "NeighborhoodMatrix",
    "PcaModel",
    "QuantileSpec",
    "SchemaError",
    "SimulationParams",
    "SpatialIndex",
    "StatRegistry",
    "ValidationError",
    "assemble",
    "build_graph",
    "build_index",
    "compute_network_features",
    "default_registry",
    "embed",
    "fit_pca",
    "kmeans",
    "load_cells_csv",
    "neighborhood_of",
    "network_matrix",
    "pca_transform",
    "quantile_matrix",
    "quantiles_of",
    "read_matrix_csv",
    "run_comparison",
    "simulate",
    "spatial_contiguity",
    "write_cells_csv",
    "write_matrix_csv",
]
