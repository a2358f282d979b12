"""taxbench: interactive taxonomy construction from tabular data.

Concepts are defined by column restrictions or set combinations over an
immutable table; a weighted self-organizing map proposes subconcepts defined
by restrictions on the most discriminating column; taxonomies export to OWL
as Turtle.
"""

from .dataset import (
    ColumnMeta,
    ColumnStats,
    Feature,
    FeatureMatrix,
    LoadOptions,
    Table,
    column_stats,
    encode_for_clustering,
    infer_column_kind,
    load_table,
)
from .discovery import (
    ConceptProposal,
    DiscoveryConfig,
    discover,
    merge_by_containment,
    propose_subconcepts,
    reassign_and_prune,
    resolve_proposal,
    top_weighted_column,
    unit_restriction,
)
from .errors import ConflictError, NotFoundError, TaxbenchError, ValidationError
from .owl import ExportOptions, OntologySkeleton, export_turtle, import_turtle, skeleton_from_taxonomy
from .stats import TaxonomyStats, compute_stats
from .taxonomy import Concept, Restriction, Taxonomy, create_root
from .wsom import (
    FeatureWeights,
    SomMap,
    TrainConfig,
    TrainTrace,
    bmu,
    init_map,
    quantization_error,
    som_update,
    train,
    weight_step,
    wsom_loss,
)

__version__ = "0.1.0"

__all__ = [
    "ColumnMeta",
    "ColumnStats",
    "Concept",
    "ConceptProposal",
    "ConflictError",
    "DiscoveryConfig",
    "ExportOptions",
    "Feature",
    "FeatureMatrix",
    "FeatureWeights",
    "LoadOptions",
    "NotFoundError",
    "OntologySkeleton",
    "Restriction",
    "SomMap",
    "Table",
    "TaxbenchError",
    "Taxonomy",
    "TaxonomyStats",
    "TrainConfig",
    "TrainTrace",
    "ValidationError",
    "bmu",
    "column_stats",
    "compute_stats",
    "create_root",
    "discover",
    "encode_for_clustering",
    "export_turtle",
    "import_turtle",
    "infer_column_kind",
    "init_map",
    "load_table",
    "merge_by_containment",
    "propose_subconcepts",
    "quantization_error",
    "reassign_and_prune",
    "resolve_proposal",
    "skeleton_from_taxonomy",
    "som_update",
    "top_weighted_column",
    "train",
    "unit_restriction",
    "weight_step",
    "wsom_loss",
    "__version__",
]
