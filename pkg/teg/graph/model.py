"""
Immutable graph containers.

Graphs are undirected and unweighted. Edges are stored once as (u, v)
with u < v, sorted; features and labels are read-only numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def canonical_edges(pairs: np.ndarray) -> np.ndarray:
    """Sort each pair, drop duplicates, return an (m, 2) int64 array in lexicographic order."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.sort(pairs, axis=1)
    return np.unique(pairs, axis=0)


def _check_class_names(names: tuple[str, ...]) -> None:
    """Class names are the original integer ids, written in strictly increasing order."""
    previous = -1
    for name in names:
        if not (isinstance(name, str) and name.isascii() and name.isdigit() and str(int(name)) == name):
            raise ValueError(f"class name {name!r} is not a non-negative integer id")
        if int(name) <= previous:
            raise ValueError(f"class names must be strictly increasing ids, got {name!r} after {previous}")
        previous = int(name)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with node features and dense class labels.

    Classes that no node uses are dropped at construction and the remaining
    ids renumbered 0..C-1; `class_names` keeps each class's original id.
    """

    num_nodes: int
    edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        edges = canonical_edges(self.edges)
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)

        if self.num_nodes < 0:
            raise ValueError(f"num_nodes must be >= 0, got {self.num_nodes}")
        if edges.size and (edges.min() < 0 or edges.max() >= self.num_nodes):
            bad = edges[(edges < 0).any(axis=1) | (edges >= self.num_nodes).any(axis=1)][0]
            raise ValueError(f"endpoint out of range: edge {bad[0]} {bad[1]} on {self.num_nodes} nodes")
        if edges.size and (edges[:, 0] == edges[:, 1]).any():
            node = int(edges[edges[:, 0] == edges[:, 1]][0, 0])
            raise ValueError(f"self-loop on node {node}")
        if features.ndim != 2 or features.shape[0] != self.num_nodes:
            raise ValueError(f"features shape {features.shape} does not match {self.num_nodes} nodes")
        if labels.shape != (self.num_nodes,):
            raise ValueError(f"labels shape {labels.shape} does not match {self.num_nodes} nodes")

        names = tuple(self.class_names)
        if not names:
            n_classes = int(labels.max()) + 1 if labels.size else 0
            names = tuple(str(c) for c in range(n_classes))
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise ValueError(f"label out of range [0, {len(names)})")
        _check_class_names(names)

        # Only used classes are kept, in id order; the label ids become dense
        used = np.unique(labels)
        names = tuple(names[c] for c in used)
        labels = np.searchsorted(used, labels).astype(np.int64)

        object.__setattr__(self, "edges", _frozen(edges))
        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "class_names", names)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def nodes_of_class(self, class_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == class_id)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.class_names == other.class_names
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.labels, other.labels)
            and self.features.shape == other.features.shape
            and self.features.tobytes() == other.features.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ClassSplit:
    base_classes: frozenset[int]
    valid_classes: frozenset[int]
    novel_classes: frozenset[int]

    def __post_init__(self) -> None:
        base, valid, novel = self.base_classes, self.valid_classes, self.novel_classes
        if base & valid or base & novel or valid & novel:
            raise ValueError("class split sets must be pairwise disjoint")
        if not base:
            raise ValueError("class split needs at least one base class")

    def check_against(self, graph: Graph) -> None:
        everything = self.base_classes | self.valid_classes | self.novel_classes
        unknown = sorted(c for c in everything if not 0 <= c < graph.num_classes)
        if unknown:
            raise ValueError(f"class split references unknown classes {unknown}")


@dataclass(frozen=True)
class LabelPool:
    """Per-class node ids eligible for episode sampling."""
    classes: Mapping[int, tuple[int, ...]]
    class_fraction: float = 1.0
    label_availability: float = 1.0
    seed: Optional[int] = None
    source: str = field(default="base")

    @property
    def class_ids(self) -> list[int]:
        return sorted(self.classes)

    @property
    def num_nodes(self) -> int:
        return sum(len(v) for v in self.classes.values())

    def sizes(self) -> dict[int, int]:
        return {c: len(self.classes[c]) for c in self.class_ids}

    def feasible_classes(self, per_class: int) -> list[int]:
        return [c for c in self.class_ids if len(self.classes[c]) >= per_class]

    def check_labels(self, graph: Graph) -> None:
        for c, nodes in self.classes.items():
            if nodes and not np.all(graph.labels[list(nodes)] == c):
                raise ValueError(f"pool for class {c} holds nodes with a different label")
