"""
Structured JSON logging for training and evaluation runs.

One flat, queryable record per training episode, validation pass,
evaluation seed or audit. Records go to stderr so that CLI stdout
stays parseable.
"""
from __future__ import annotations

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Optional

from teg.config import settings

# Dedicated logger for trace events (separate from operational logs)
_trace_logger: Optional[logging.Logger] = None


class JsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        # record.msg is already a dict for our trace logs
        if isinstance(record.msg, dict):
            return json.dumps(record.msg, default=str, ensure_ascii=False)
        return super().format(record)


def _get_trace_logger() -> logging.Logger:
    """Get or create the trace logger with JSON formatting."""
    global _trace_logger
    if _trace_logger is not None:
        return _trace_logger

    _trace_logger = logging.getLogger("teg.trace")
    _trace_logger.setLevel(logging.INFO if settings.trace_enabled else logging.CRITICAL)
    _trace_logger.propagate = False  # Don't bubble to root logger

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(logging.INFO)
    handler.setFormatter(JsonFormatter())
    _trace_logger.addHandler(handler)

    return _trace_logger


def _emit(record_type: str, fields: dict[str, Any]) -> None:
    record = {
        "type": record_type,
        "ts": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
    }
    # Optional fields (only include if present)
    record.update({k: v for k, v in fields.items() if v is not None})
    _get_trace_logger().info(record)


def log_training_episode(
    *,
    run_id: str,
    episode: int,
    loss: float,
    loss_task: float,
    loss_graph: float,
    n_way: int,
    classes: list[int],
) -> None:
    """
    Log one optimisation step.

    Args:
        run_id: config hash of the run
        episode: 0-based training episode index
        loss: combined objective value
        loss_task: task-embedder loss term
        loss_graph: graph-embedder loss term
        n_way: way of the sampled training episode
        classes: global class ids of the episode
    """
    _emit("train_episode", {
        "run_id": run_id,
        "episode": episode,
        "loss": loss,
        "loss_task": loss_task,
        "loss_graph": loss_graph,
        "n_way": n_way,
        "classes": classes,
    })


def log_validation(*, run_id: str, episode: int, accuracy: float, best: bool) -> None:
    _emit("validation", {"run_id": run_id, "episode": episode, "accuracy": accuracy, "best": best})


def log_eval_run(
    *,
    run_id: str,
    seed: int,
    accuracy: float,
    episodes: int,
    split: Optional[str] = None,
) -> None:
    _emit("eval_seed", {
        "run_id": run_id,
        "seed": seed,
        "accuracy": accuracy,
        "episodes": episodes,
        "split": split,
    })


def log_audit(
    *,
    run_id: str,
    transforms: int,
    acc_reference: float,
    acc_transformed: float,
    agreement: float,
    noise_sigma: Optional[float] = None,
) -> None:
    _emit("equivariance_audit", {
        "run_id": run_id,
        "transforms": transforms,
        "acc_reference": acc_reference,
        "acc_transformed": acc_transformed,
        "agreement": agreement,
        "noise_sigma": noise_sigma,
    })
