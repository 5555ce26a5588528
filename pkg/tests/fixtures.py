"""Small graphs and run configs shared by the test modules."""
from __future__ import annotations

import numpy as np

from teg.episodes.tasks import MetaTask
from teg.graph.model import Graph
from teg.harness.run_config import RunConfig, with_overrides

TINY_RUN = {
    "sbm.num_classes": 9,
    "sbm.nodes_per_class": 20,
    "sbm.feature_dim": 8,
    "sbm.p_in": 0.2,
    "sbm.p_out": 0.02,
    "sbm.class_mean_scale": 2.0,
    "split.base": 3,
    "split.valid": 3,
    "split.novel": 3,
    "episode.n_way": 3,
    "episode.k_shot": 2,
    "episode.m_query": 3,
    "episode.episodes_train": 10,
    "episode.episodes_eval": 5,
    "episode.eval_seeds": 2,
    "anchors": 4,
    "gcn.output_dim": 8,
    "egnn.message_dim": 16,
    "egnn.hidden_dim": 16,
    "validation_every": 5,
    "validation_episodes": 3,
}


def tiny_config(**overrides) -> RunConfig:
    """Fast run config; keyword names use '__' for '.' (episode__n_way=2)."""
    values = dict(TINY_RUN)
    values.update({k.replace("__", "."): v for k, v in overrides.items()})
    return with_overrides(RunConfig(), values)


def labeled_graph(sizes: list[int], feature_dim: int = 2, edges=None) -> Graph:
    """Graph with `sizes[c]` nodes of class c, consecutive ids, optional edges."""
    labels = np.repeat(np.arange(len(sizes)), sizes)
    features = np.arange(labels.size * feature_dim, dtype=np.float64).reshape(labels.size, feature_dim)
    return Graph(
        num_nodes=int(labels.size),
        edges=np.zeros((0, 2), dtype=np.int64) if edges is None else np.asarray(edges),
        features=features,
        labels=labels,
    )


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def manual_task(n_way: int, k_shot: int, m_query: int) -> MetaTask:
    """Task over node ids 0..N(K+M)-1, support first, class-major."""
    return MetaTask(
        n_way=n_way,
        k_shot=k_shot,
        m_query=m_query,
        support_nodes=np.arange(n_way * k_shot),
        support_labels=np.repeat(np.arange(n_way), k_shot),
        query_nodes=np.arange(n_way * k_shot, n_way * (k_shot + m_query)),
        query_labels=np.repeat(np.arange(n_way), m_query),
        origin_classes=tuple(range(n_way)),
    )
