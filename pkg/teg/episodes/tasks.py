"""
Meta-task sampling.

A MetaTask is laid out class-major: support rows for local class 0, then
class 1, ...; queries likewise. Local class ids follow the order in which
classes were drawn.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from teg.graph.model import LabelPool
from teg.graph.splits import InfeasiblePoolError
from teg.numerics.rng import child_rng


@dataclass(frozen=True)
class EpisodeConfig:
    n_way: int = 5
    k_shot: int = 5
    m_query: int = 5
    episodes_train: int = 500
    episodes_eval: int = 50
    eval_seeds: int = 5
    gamma: float = 0.5
    train_way: int = 0  # 0 = train at n_way

    def __post_init__(self) -> None:
        if self.n_way < 2 or self.k_shot < 1 or self.m_query < 1:
            raise ValueError(f"episode shape needs N >= 2, K >= 1, M >= 1; got {self.n_way}/{self.k_shot}/{self.m_query}")
        if self.train_way == 1 or self.train_way < 0:
            raise ValueError(f"train_way must be 0 or >= 2, got {self.train_way}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.episodes_train < 0 or self.episodes_eval < 1 or self.eval_seeds < 1:
            raise ValueError("episode counts must be positive (episodes_train may be 0)")

    @property
    def training_way(self) -> int:
        return self.train_way or self.n_way

    @property
    def per_class(self) -> int:
        return self.k_shot + self.m_query


@dataclass(frozen=True, eq=False)
class MetaTask:
    n_way: int
    k_shot: int
    m_query: int
    support_nodes: np.ndarray
    support_labels: np.ndarray
    query_nodes: np.ndarray
    query_labels: np.ndarray
    origin_classes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.origin_classes) != self.n_way:
            raise ValueError(f"expected {self.n_way} origin classes, got {len(self.origin_classes)}")
        if self.support_nodes.shape != (self.n_way * self.k_shot,) or self.query_nodes.shape != (self.n_way * self.m_query,):
            raise ValueError("support/query sizes do not match N, K, M")
        if np.intersect1d(self.support_nodes, self.query_nodes).size:
            raise ValueError("support and query nodes overlap")
        for labels, per in ((self.support_labels, self.k_shot), (self.query_labels, self.m_query)):
            if not np.array_equal(np.bincount(labels, minlength=self.n_way), np.full(self.n_way, per)):
                raise ValueError("every local class needs exactly K support and M query nodes")

    @property
    def nodes(self) -> np.ndarray:
        """Support nodes then query nodes: the task graph's local order."""
        return np.concatenate([self.support_nodes, self.query_nodes])

    @property
    def num_nodes(self) -> int:
        return int(self.support_nodes.shape[0] + self.query_nodes.shape[0])

    @property
    def num_support(self) -> int:
        return int(self.support_nodes.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetaTask):
            return NotImplemented
        return (
            (self.n_way, self.k_shot, self.m_query, self.origin_classes)
            == (other.n_way, other.k_shot, other.m_query, other.origin_classes)
            and np.array_equal(self.support_nodes, other.support_nodes)
            and np.array_equal(self.query_nodes, other.query_nodes)
        )

    __hash__ = None  # type: ignore[assignment]


def sample_task(
    pool: LabelPool,
    cfg: EpisodeConfig,
    seed: int,
    n_way: Optional[int] = None,
) -> MetaTask:
    """Draw N classes, then K + M distinct nodes from each, without replacement."""
    n = n_way or cfg.n_way
    k, m = cfg.k_shot, cfg.m_query
    feasible = pool.feasible_classes(k + m)
    if len(feasible) < n:
        raise InfeasiblePoolError(
            f"insufficient classes: need {n} classes with >= {k + m} nodes, "
            f"pool has {len(feasible)} such classes out of {len(pool.class_ids)}"
        )
    rng = child_rng(seed, "episode")
    chosen = [int(c) for c in rng.choice(np.asarray(feasible), size=n, replace=False)]

    support, query = [], []
    for c in chosen:
        picked = rng.choice(np.asarray(pool.classes[c]), size=k + m, replace=False)
        support.append(picked[:k])
        query.append(picked[k:])
    return MetaTask(
        n_way=n,
        k_shot=k,
        m_query=m,
        support_nodes=np.concatenate(support).astype(np.int64),
        support_labels=np.repeat(np.arange(n), k),
        query_nodes=np.concatenate(query).astype(np.int64),
        query_labels=np.repeat(np.arange(n), m),
        origin_classes=tuple(chosen),
    )
