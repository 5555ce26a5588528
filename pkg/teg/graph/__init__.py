"""Graph data model, on-disk format, class splits and synthetic generators."""
from teg.graph.model import ClassSplit, Graph, LabelPool
from teg.graph.io import GraphFormatError, load_graph, save_graph
from teg.graph.splits import (
    InfeasiblePoolError,
    class_combinations,
    full_pool,
    restrict_pool,
    split_classes,
)
from teg.graph.synthetic import SbmConfig, generate_components, generate_sbm, read_sbm_config

__all__ = [
    "ClassSplit",
    "Graph",
    "GraphFormatError",
    "InfeasiblePoolError",
    "LabelPool",
    "SbmConfig",
    "class_combinations",
    "full_pool",
    "generate_components",
    "generate_sbm",
    "load_graph",
    "read_sbm_config",
    "restrict_pool",
    "save_graph",
    "split_classes",
]
