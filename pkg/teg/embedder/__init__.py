"""Equivariant task embedder over per-episode task graphs."""
from teg.embedder.egnn import (
    EgnnConfig,
    TaskEmbedding,
    egnn_layer,
    egnn_message,
    embed_task,
    init_egnn_params,
)
from teg.embedder.task_graph import BIPARTITE, COMPLETE, TaskGraph, build_task_graph

__all__ = [
    "BIPARTITE",
    "COMPLETE",
    "EgnnConfig",
    "TaskEmbedding",
    "TaskGraph",
    "build_task_graph",
    "egnn_layer",
    "egnn_message",
    "embed_task",
    "init_egnn_params",
]
