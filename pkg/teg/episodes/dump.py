"""JSONL dumps of sampled episodes and their predictions, one object per line."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from teg.episodes.tasks import MetaTask


def episode_record(task: MetaTask, index: int, predictions: Optional[np.ndarray] = None) -> dict:
    record = {
        "episode": index,
        "n_way": task.n_way,
        "k_shot": task.k_shot,
        "m_query": task.m_query,
        "classes": list(task.origin_classes),
        "support": task.support_nodes.tolist(),
        "support_labels": task.support_labels.tolist(),
        "query": task.query_nodes.tolist(),
        "query_labels": task.query_labels.tolist(),
    }
    if predictions is not None:
        record["predictions"] = np.asarray(predictions).tolist()
        record["correct"] = int(np.sum(np.asarray(predictions) == task.query_labels))
    return record


def dump_episodes(path: str | Path, records: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return path
