"""
Task graphs.

Local node order is the episode's support nodes followed by its queries.
complete: every pair of distinct task nodes is connected.
bipartite: support-support and support-query pairs only; queries never
exchange messages with each other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from teg.episodes.tasks import MetaTask

COMPLETE = "complete"
BIPARTITE = "bipartite"
MODES = (COMPLETE, BIPARTITE)


@dataclass(frozen=True, eq=False)
class TaskGraph:
    num_nodes: int
    num_support: int
    receivers: np.ndarray  # message j -> i is stored as (receivers[e], senders[e]) = (i, j)
    senders: np.ndarray
    mode: str

    @property
    def normalizer(self) -> int:
        """C = |T| - 1 in both modes."""
        return self.num_nodes - 1

    @property
    def num_edges(self) -> int:
        return int(self.receivers.shape[0])

    def neighbors(self, i: int) -> set[int]:
        return {int(j) for j in self.senders[self.receivers == i]}


def task_graph_for_sizes(num_support: int, num_query: int, mode: str = COMPLETE) -> TaskGraph:
    if mode not in MODES:
        raise ValueError(f"unknown task-graph mode {mode!r}; expected one of {MODES}")
    n = num_support + num_query
    if n < 2:
        raise ValueError(f"task graph needs at least 2 nodes, got {n}")
    recv, send = np.nonzero(~np.eye(n, dtype=bool))
    if mode == BIPARTITE:
        keep = (recv < num_support) | (send < num_support)
        recv, send = recv[keep], send[keep]
    return TaskGraph(
        num_nodes=n,
        num_support=num_support,
        receivers=recv.astype(np.int64),
        senders=send.astype(np.int64),
        mode=mode,
    )


def build_task_graph(task: MetaTask, mode: str = COMPLETE) -> TaskGraph:
    return task_graph_for_sizes(len(task.support_nodes), len(task.query_nodes), mode)
