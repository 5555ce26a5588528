"""Virtual anchors and inverse shortest-path structural features."""
from teg.structural.anchors import (
    AnchorSet,
    StructuralFeatures,
    anchor_degrees,
    attach_anchors,
    augmented_adjacency,
    bfs_distances,
    build_structural_features,
    graph_anchor_features,
    zero_ratio,
)

__all__ = [
    "AnchorSet",
    "StructuralFeatures",
    "anchor_degrees",
    "attach_anchors",
    "augmented_adjacency",
    "bfs_distances",
    "build_structural_features",
    "graph_anchor_features",
    "zero_ratio",
]
