"""
Prototype classification and the two episode losses.

Prototypes are class means of the support embeddings; a query's class
distribution is the softmax of negative squared Euclidean distances to
them. The same head scores the task-embedder coordinates (loss_task) and
the raw graph-embedder rows (loss_graph).
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from teg.episodes.tasks import MetaTask
from teg.numerics.tensor import (
    ShapeError,
    Tensor,
    add,
    as_tensor,
    gather_rows,
    log_softmax,
    matmul,
    nll,
    pairwise_sqdist,
    scale,
)


def _averaging_matrix(labels: np.ndarray, n_way: int) -> np.ndarray:
    if labels.size and (labels.min() < 0 or labels.max() >= n_way):
        raise ValueError(f"support labels out of range [0, {n_way})")
    counts = np.bincount(labels, minlength=n_way)
    if np.any(counts == 0):
        missing = [c for c in range(n_way) if counts[c] == 0]
        raise ValueError(f"no support rows for classes {missing}")
    onehot = np.zeros((n_way, labels.shape[0]))
    onehot[labels, np.arange(labels.shape[0])] = 1.0
    return onehot / counts[:, None]


def prototypes(z_support: Tensor | np.ndarray, labels: np.ndarray, n_way: int) -> Tensor:
    """Row c is the mean of the support rows labeled c."""
    z_support = as_tensor(z_support)
    labels = np.asarray(labels, dtype=np.int64)
    if z_support.ndim != 2 or labels.shape != (z_support.shape[0],):
        raise ShapeError(f"prototypes shape mismatch: {z_support.shape} vs labels {labels.shape}")
    return matmul(Tensor(_averaging_matrix(labels, n_way)), z_support)


def class_log_probs(z_query: Tensor | np.ndarray, protos: Tensor | np.ndarray) -> Tensor:
    return log_softmax(scale(pairwise_sqdist(z_query, protos), -1.0))


def class_probs(z_query: np.ndarray | Tensor, protos: np.ndarray | Tensor) -> np.ndarray:
    """Distribution over classes for one query (d,) or a batch (Q, d)."""
    q = as_tensor(z_query)
    single = q.ndim == 1
    rows = Tensor(q.data[None, :]) if single else q
    probs = np.exp(class_log_probs(rows, protos).data)
    return probs[0] if single else probs


def _episode_loss(task: MetaTask, rows: Tensor) -> Tensor:
    """Summed NLL of the queries; `rows` follows the task's local order."""
    rows = as_tensor(rows)
    if rows.ndim != 2 or rows.shape[0] != task.num_nodes:
        raise ShapeError(f"expected {task.num_nodes} task rows, got {rows.shape}")
    s = task.num_support
    support = gather_rows(rows, np.arange(s))
    query = gather_rows(rows, np.arange(s, task.num_nodes))
    protos = prototypes(support, task.support_labels, task.n_way)
    return nll(class_log_probs(query, protos), task.query_labels)


def loss_task(task: MetaTask, z_coords: Tensor) -> Tensor:
    """NLL over the task-embedder coordinates."""
    return _episode_loss(task, z_coords)


def loss_graph(task: MetaTask, h_rows: Tensor) -> Tensor:
    """NLL over the graph-embedder rows of the task nodes."""
    return _episode_loss(task, h_rows)


def combine_losses(task_term: Optional[Tensor], graph_term: Tensor, gamma: float) -> Tensor:
    """gamma * loss_task + (1 - gamma) * loss_graph; gamma=0 drops the task term entirely."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    if gamma == 0.0:
        return graph_term
    if task_term is None:
        raise ValueError("gamma > 0 needs the task-embedder loss")
    if gamma == 1.0:
        return task_term
    return add(scale(task_term, gamma), scale(graph_term, 1.0 - gamma))


def total_loss(task: MetaTask, z_coords: Optional[Tensor], h_rows: Tensor, gamma: float) -> Tensor:
    task_term = loss_task(task, z_coords) if gamma > 0.0 else None
    return combine_losses(task_term, loss_graph(task, h_rows), gamma)


def predict(probs: np.ndarray) -> np.ndarray:
    """Arg-max class per query; ties go to the lowest class index."""
    return np.argmax(np.asarray(probs), axis=-1)


def episode_predictions(task: MetaTask, rows: Tensor | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(predicted local labels, probabilities) for the task's queries from its local rows."""
    data = as_tensor(rows).data
    s = task.num_support
    protos = prototypes(data[:s], task.support_labels, task.n_way)
    probs = class_probs(data[s:], protos)
    return predict(probs), probs
