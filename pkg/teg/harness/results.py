"""Result files: JSONL records, CSV tables and grid heatmaps. No timestamps, so reruns are byte-identical."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from teg.harness.diversity import OK, SweepPoint
from teg.harness.evaluation import EvalReport


def _ready(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_jsonl(path: str | Path, records: Iterable[dict]) -> Path:
    path = _ready(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def write_csv(path: str | Path, rows: Sequence[dict], fieldnames: Sequence[str] | None = None) -> Path:
    path = _ready(path)
    fieldnames = list(fieldnames or (rows[0].keys() if rows else []))
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_eval_report(path: str | Path, report: EvalReport) -> Path:
    """One JSON record per evaluation seed."""
    return write_jsonl(path, report.records())


def write_training_log(path: str | Path, log: Iterable[dict]) -> Path:
    return write_jsonl(path, log)


def _cell(point: SweepPoint) -> str:
    return f"{point.report.mean:.4f}" if point.status == OK and point.report else point.status


def write_grid_csv(
    path: str | Path,
    grid: Sequence[Sequence[SweepPoint]],
    fractions: Sequence[float],
    availabilities: Sequence[float],
) -> Path:
    """Heatmap: one row per class fraction, one column per label availability, mean accuracy or 'infeasible'."""
    header = ["class_fraction"] + [f"availability={a}" for a in availabilities]
    rows = [
        dict(zip(header, [str(f)] + [_cell(p) for p in row]))
        for f, row in zip(fractions, grid)
    ]
    return write_csv(path, rows, header)


def sweep_rows(points: Sequence[SweepPoint]) -> list[dict]:
    rows = []
    for p in points:
        row = {key: value for key, value in p.overrides}
        row["status"] = p.status
        row["mean"] = f"{p.report.mean:.4f}" if p.report else ""
        row["std"] = f"{p.report.std:.4f}" if p.report else ""
        rows.append(row)
    return rows
