"""
GCN graph embedder.

H^(l) = Â · dropout(X) · W with Â = D̃^-1/2 (A + I) D̃^-1/2. No bias and
no activation: a linear projection through the normalized adjacency.
Virtual anchors never enter Â.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from teg.graph.model import Graph
from teg.numerics.params import INIT_GLOROT, ParamStore
from teg.numerics.tensor import ShapeError, Tensor, default_dtype, dropout, matmul, sparse_matmul


@dataclass(frozen=True)
class GcnConfig:
    input_dim: int = 0  # 0 = take it from the graph
    output_dim: int = 64
    dropout_rate: float = 0.5
    layers: int = 1

    def __post_init__(self) -> None:
        if self.input_dim < 0 or self.output_dim < 1 or self.layers < 1:
            raise ValueError(
                f"GcnConfig dims must be >= 1 (input_dim={self.input_dim}, "
                f"output_dim={self.output_dim}, layers={self.layers})"
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")


@dataclass(frozen=True)
class NormalizedAdjacency:
    matrix: sp.csr_matrix

    @property
    def num_nodes(self) -> int:
        return int(self.matrix.shape[0])


def normalize_adjacency(graph: Graph) -> NormalizedAdjacency:
    """Symmetric normalization with self-loops."""
    n = graph.num_nodes
    rows = np.concatenate([graph.edges[:, 0], graph.edges[:, 1], np.arange(n)])
    cols = np.concatenate([graph.edges[:, 1], graph.edges[:, 0], np.arange(n)])
    a_tilde = sp.csr_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(n, n))
    inv_sqrt = 1.0 / np.sqrt(np.asarray(a_tilde.sum(axis=1)).ravel())
    d = sp.diags(inv_sqrt)
    return NormalizedAdjacency(matrix=(d @ a_tilde @ d).tocsr().astype(default_dtype()))


def gcn_param_name(layer: int) -> str:
    return f"gcn.{layer}.weight"


def init_gcn_params(params: ParamStore, config: GcnConfig, input_dim: int) -> None:
    """Glorot weights, F -> d_l for one layer; extra layers are d_l -> d_l."""
    dims = [input_dim] + [config.output_dim] * config.layers
    for layer in range(config.layers):
        params.create(gcn_param_name(layer), (dims[layer], dims[layer + 1]), INIT_GLOROT)


def gcn_forward(
    adjacency: NormalizedAdjacency,
    features: np.ndarray | Tensor,
    params: ParamStore,
    config: GcnConfig,
    train_mode: bool,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Full-graph forward; dropout on the input features only in train mode."""
    x = features if isinstance(features, Tensor) else Tensor(features)
    if x.shape[0] != adjacency.num_nodes:
        raise ShapeError(f"gcn_forward shape mismatch: features {x.shape} vs adjacency {adjacency.matrix.shape}")
    h = dropout(x, config.dropout_rate, rng, train_mode)
    for layer in range(config.layers):
        # Â (X W) == (Â X) W
        h = sparse_matmul(adjacency.matrix, matmul(h, params.tensor(gcn_param_name(layer))))
    return h
