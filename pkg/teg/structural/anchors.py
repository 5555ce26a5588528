"""
Virtual anchor nodes and structural features.

Anchor i (1-indexed) links to every real node independently with
probability 2^-i, so anchor 1 is a near-hub and later anchors are sparse.
Anchors never link to each other. Distances are taken on the augmented
graph, where anchors may be used as through-vertices, so they can
bridge disconnected components.

A node's structural feature for anchor i is 1 / (d + 1), or 0 when the
anchor is unreachable. Real nodes are at distance >= 1 from any virtual
anchor, so virtual-anchor entries never exceed 1/2.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from teg.concurrency import fan_out
from teg.graph.model import Graph
from teg.numerics.rng import child_rng

logger = logging.getLogger(__name__)

VIRTUAL = "virtual"
IN_GRAPH = "in-graph"


@dataclass(frozen=True, eq=False)
class AnchorSet:
    num_nodes: int
    adjacency: np.ndarray  # (k, num_nodes) bool, row i-1 is anchor i
    seed: int

    @property
    def k(self) -> int:
        return int(self.adjacency.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AnchorSet):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.seed == other.seed
            and np.array_equal(self.adjacency, other.adjacency)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class StructuralFeatures:
    matrix: np.ndarray  # (|V|, k), entries in [0, 1]
    kind: str = VIRTUAL

    @property
    def k(self) -> int:
        return int(self.matrix.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StructuralFeatures):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.matrix, other.matrix)

    __hash__ = None  # type: ignore[assignment]


def attach_anchors(graph: Graph, k: int, seed: int) -> AnchorSet:
    """k virtual anchors; anchor i connects each real node with probability 2^-i."""
    if k < 0:
        raise ValueError(f"anchor count must be >= 0, got {k}")
    rng = child_rng(seed, "virtual-anchors")
    rows = np.zeros((k, graph.num_nodes), dtype=bool)
    for i in range(1, k + 1):
        rows[i - 1] = rng.random(graph.num_nodes) < 2.0 ** -i
    rows.setflags(write=False)
    anchors = AnchorSet(num_nodes=graph.num_nodes, adjacency=rows, seed=seed)
    empty = [i + 1 for i, d in enumerate(anchor_degrees(anchors)) if d == 0]
    if empty:
        logger.debug("attach_anchors: anchors %s have no edges (kept as all-zero columns)", empty)
    return anchors


def anchor_degrees(anchors: AnchorSet) -> list[int]:
    return [int(d) for d in anchors.adjacency.sum(axis=1)]


def _graph_csr(graph: Graph, extra_nodes: int = 0, extra_edges: Optional[np.ndarray] = None) -> sp.csr_matrix:
    n = graph.num_nodes + extra_nodes
    pairs = graph.edges if extra_edges is None else np.vstack([graph.edges, extra_edges])
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.ones(rows.shape[0], dtype=np.int8)
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def augmented_adjacency(graph: Graph, anchors: AnchorSet) -> sp.csr_matrix:
    """Symmetric CSR over real nodes [0, |V|) then anchors [|V|, |V|+k)."""
    if anchors.num_nodes != graph.num_nodes:
        raise ValueError(f"anchors built for {anchors.num_nodes} nodes, graph has {graph.num_nodes}")
    anchor_idx, node_idx = np.nonzero(anchors.adjacency)
    extra = np.stack([node_idx, anchor_idx + graph.num_nodes], axis=1).astype(np.int64)
    return _graph_csr(graph, anchors.k, extra)


def _bfs(adjacency: sp.csr_matrix, source: int) -> np.ndarray:
    """Level-synchronous BFS; inf for unreachable vertices."""
    dist = np.full(adjacency.shape[0], np.inf)
    dist[source] = 0.0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        neighbours = np.unique(adjacency[frontier].indices)
        frontier = neighbours[np.isinf(dist[neighbours])]
        dist[frontier] = level
    return dist


def bfs_distances(
    graph: Graph,
    anchors: AnchorSet,
    anchor_index: int,
    adjacency: Optional[sp.csr_matrix] = None,
) -> np.ndarray:
    """Hop distance from anchor `anchor_index` (0-based row) to every real node."""
    if not 0 <= anchor_index < anchors.k:
        raise IndexError(f"anchor_index {anchor_index} out of range for k={anchors.k}")
    if adjacency is None:
        adjacency = augmented_adjacency(graph, anchors)
    return _bfs(adjacency, graph.num_nodes + anchor_index)[: graph.num_nodes]


def _inverse_distance(dist: np.ndarray) -> np.ndarray:
    out = np.zeros_like(dist)
    finite = np.isfinite(dist)
    out[finite] = 1.0 / (dist[finite] + 1.0)
    return out


def _features(columns: list[np.ndarray], num_nodes: int, kind: str) -> StructuralFeatures:
    matrix = np.stack(columns, axis=1) if columns else np.zeros((num_nodes, 0))
    matrix.setflags(write=False)
    return StructuralFeatures(matrix=matrix, kind=kind)


def build_structural_features(graph: Graph, anchors: AnchorSet) -> StructuralFeatures:
    """H^(s)[v, i] = 1 / (d_i(v) + 1) on the augmented graph, 0 when unreachable."""
    adjacency = augmented_adjacency(graph, anchors)
    columns = fan_out(
        lambda i: _inverse_distance(bfs_distances(graph, anchors, i, adjacency)),
        range(anchors.k),
    )
    return _features(columns, graph.num_nodes, VIRTUAL)


def graph_anchor_features(graph: Graph, k: int, seed: int) -> StructuralFeatures:
    """Same features with k uniformly random real nodes as anchors and no virtual nodes."""
    if not 0 <= k <= graph.num_nodes:
        raise ValueError(f"need 0 <= k <= {graph.num_nodes} in-graph anchors, got {k}")
    adjacency = _graph_csr(graph)
    picks = child_rng(seed, "in-graph-anchors").choice(graph.num_nodes, size=k, replace=False)
    columns = [_inverse_distance(_bfs(adjacency, int(a))) for a in picks]
    return _features(columns, graph.num_nodes, IN_GRAPH)


def zero_ratio(features: StructuralFeatures, columns: Optional[np.ndarray] = None) -> float:
    """Fraction of zero entries (node/anchor pairs with no connecting path), optionally over a column subset."""
    matrix = features.matrix if columns is None else features.matrix[:, columns]
    if matrix.shape[1] == 0:
        raise ValueError("no anchors")
    return float(np.count_nonzero(matrix == 0.0)) / matrix.size
