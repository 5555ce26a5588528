"""
Episodic training loop.

Per episode: full-graph GCN forward with dropout, episode gather, task
embedding, combined loss, backward, Adam. Every `validation_every`
episodes the model is scored on validation-class episodes and the best
parameters so far are kept together with the Adam state of that episode;
the returned pair is the best one when any validation ran, the final one
otherwise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from teg import trace_logger
from teg.episodes.tasks import sample_task
from teg.graph.splits import InfeasiblePoolError, check_episode_shape
from teg.harness.evaluation import episode_accuracy, sample_eval_tasks
from teg.harness.model import RunContext, TegModel, init_model, prepare_run
from teg.harness.run_config import RunConfig
from teg.numerics.optim import AdamState, adam_step
from teg.numerics.params import ParamStore
from teg.numerics.rng import child_rng, child_seed
from teg.numerics.tensor import NonFiniteError, backward

logger = logging.getLogger(__name__)


@dataclass
class TrainResult:
    params: ParamStore
    adam: AdamState
    log: list[dict] = field(default_factory=list)
    best_episode: Optional[int] = None
    best_accuracy: Optional[float] = None


def _validation_pool(ctx: RunContext):
    ep = ctx.cfg.episode
    if ctx.valid_pool is None:
        logger.warning("No validation classes; training without model selection")
        return None
    try:
        check_episode_shape(ctx.valid_pool, ep.n_way, ep.k_shot, ep.m_query)
    except InfeasiblePoolError as e:
        logger.warning("Skipping validation: %s", e)
        return None
    return ctx.valid_pool


def train(cfg: RunConfig, ctx: Optional[RunContext] = None) -> TrainResult:
    ctx = ctx if ctx is not None else prepare_run(cfg)
    model = init_model(ctx)
    params = model.params
    adam = AdamState.for_params(params, lr=cfg.optim.lr, weight_decay=cfg.optim.weight_decay)
    ep = cfg.episode
    run_id = ctx.run_id

    valid_pool = _validation_pool(ctx) if ep.episodes_train else None
    valid_tasks = (
        sample_eval_tasks(valid_pool, ep, child_seed(cfg.seed, "validation"), cfg.validation_episodes)
        if valid_pool is not None else []
    )

    result = TrainResult(params=params, adam=adam)
    best: Optional[tuple[ParamStore, AdamState]] = None
    logger.info(
        "Training %s: %d episodes, %d-way %d-shot %d-query, gamma=%s",
        run_id, ep.episodes_train, ep.training_way, ep.k_shot, ep.m_query, ep.gamma,
    )

    for episode in range(ep.episodes_train):
        task = sample_task(ctx.train_pool, ep, child_seed(cfg.seed, "train-episode", episode), n_way=ep.training_way)
        try:
            h_all = model.graph_embeddings(train_mode=True, rng=child_rng(cfg.seed, "dropout", episode))
            total, task_term, graph_term = model.episode_loss(task, h_all, ep.gamma)
        except NonFiniteError as e:
            raise NonFiniteError(f"training episode {episode}: {e}") from e

        grads = backward(total, params)
        adam_step(params, grads, adam)

        record = {
            "episode": episode,
            "loss": float(total.data),
            "loss_task": float(task_term.data) if task_term is not None else None,
            "loss_graph": float(graph_term.data),
            "classes": list(task.origin_classes),
        }
        result.log.append(record)
        trace_logger.log_training_episode(run_id=run_id, n_way=task.n_way, **record)

        if valid_tasks and (episode + 1) % cfg.validation_every == 0:
            accuracy = _validate(model, valid_tasks, ep.gamma)
            improved = result.best_accuracy is None or accuracy > result.best_accuracy
            if improved:
                best = params.snapshot(), adam.snapshot()
                result.best_accuracy, result.best_episode = accuracy, episode
            trace_logger.log_validation(run_id=run_id, episode=episode, accuracy=accuracy, best=improved)
            logger.info("Episode %d: validation accuracy %.4f%s", episode + 1, accuracy, " (best)" if improved else "")

    if best is not None:
        # The checkpoint pairs the selected parameters with the optimizer state of that episode
        result.params, result.adam = best
    if result.log:
        logger.info(
            "Training done: loss %.4f -> %.4f, best validation %s at episode %s",
            result.log[0]["loss"], result.log[-1]["loss"], result.best_accuracy, result.best_episode,
        )
    return result


def _validate(model: TegModel, tasks, gamma: float) -> float:
    h_all = model.graph_embeddings(train_mode=False)
    correct = total = 0
    for task in tasks:
        c, n = episode_accuracy(model, task, h_all, gamma)
        correct, total = correct + c, total + n
    return correct / total
