"""
Few-shot evaluation on held-out classes.

Each of `eval_seeds` seeds samples `episodes_eval` episodes from the pool;
a seed's accuracy is correct queries over N * M * episodes. Episodes are
scored concurrently against one eval-mode GCN forward.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from teg import trace_logger
from teg.concurrency import fan_out
from teg.episodes.tasks import EpisodeConfig, MetaTask, sample_task
from teg.graph.model import LabelPool
from teg.graph.splits import check_episode_shape
from teg.harness.model import RowTransform, TegModel
from teg.harness.run_config import RunConfig, config_hash
from teg.numerics.rng import child_seed
from teg.numerics.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalReport:
    accuracies: tuple[float, ...]  # one per seed
    episodes: int                  # per seed
    n_way: int
    k_shot: int
    m_query: int
    config_hash: str
    split: str = "novel"

    def __post_init__(self) -> None:
        if not self.accuracies or any(not 0.0 <= a <= 1.0 for a in self.accuracies):
            raise ValueError(f"accuracies must be a non-empty list in [0, 1], got {self.accuracies}")

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        """Population standard deviation over seeds."""
        return float(np.std(self.accuracies))

    def records(self) -> list[dict]:
        return [
            {
                "config_hash": self.config_hash,
                "split": self.split,
                "seed": seed,
                "accuracy": accuracy,
                "episodes": self.episodes,
                "n_way": self.n_way,
                "k_shot": self.k_shot,
                "m_query": self.m_query,
            }
            for seed, accuracy in enumerate(self.accuracies)
        ]

    def summary(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "split": self.split,
            "n_way": self.n_way,
            "k_shot": self.k_shot,
            "mean": self.mean,
            "std": self.std,
            "seeds": len(self.accuracies),
            "episodes": self.episodes,
        }


def sample_eval_tasks(pool: LabelPool, cfg: EpisodeConfig, seed: int, count: int) -> list[MetaTask]:
    return [sample_task(pool, cfg, child_seed(seed, "eval-episode", i)) for i in range(count)]


def episode_accuracy(
    model: TegModel,
    task: MetaTask,
    h_all: Tensor,
    gamma: float,
    transform: Optional[RowTransform] = None,
) -> tuple[int, int]:
    """(correct, total) over the task's queries."""
    predictions, _ = model.predict_episode(task, h_all, gamma, transform)
    return int(np.sum(predictions == task.query_labels)), int(task.query_labels.shape[0])


def evaluate(model: TegModel, pool: LabelPool, cfg: RunConfig, split: str = "novel") -> EvalReport:
    ep = cfg.episode
    check_episode_shape(pool, ep.n_way, ep.k_shot, ep.m_query)
    run_id = config_hash(cfg)
    before = model.params.checksum()
    h_all = model.graph_embeddings(train_mode=False)

    accuracies = []
    for s in range(ep.eval_seeds):
        tasks = sample_eval_tasks(pool, ep, child_seed(cfg.seed, "eval", s), ep.episodes_eval)
        counts = fan_out(lambda task: episode_accuracy(model, task, h_all, ep.gamma), tasks)
        accuracy = sum(c for c, _ in counts) / sum(n for _, n in counts)
        accuracies.append(accuracy)
        trace_logger.log_eval_run(run_id=run_id, seed=s, accuracy=accuracy, episodes=len(tasks), split=split)

    if model.params.checksum() != before:
        raise RuntimeError("evaluation modified model parameters")

    report = EvalReport(
        accuracies=tuple(accuracies),
        episodes=ep.episodes_eval,
        n_way=ep.n_way,
        k_shot=ep.k_shot,
        m_query=ep.m_query,
        config_hash=run_id,
        split=split,
    )
    logger.info("Evaluated %s on %s: %.4f +/- %.4f over %d seeds", run_id, split, report.mean, report.std, ep.eval_seeds)
    return report
