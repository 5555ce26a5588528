"""
Training-set diversity experiments.

Every point trains its own model under the run's seed and evaluates on the
full novel pool. Points run concurrently; a point whose restricted pool
cannot supply training episodes is recorded as infeasible instead of
failing the sweep.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from teg.concurrency import fan_out
from teg.graph.model import Graph
from teg.graph.splits import InfeasiblePoolError
from teg.harness.evaluation import EvalReport, evaluate
from teg.harness.model import init_model, load_run_graph, prepare_run
from teg.harness.run_config import RunConfig, with_overrides
from teg.harness.trainer import TrainResult, train

logger = logging.getLogger(__name__)

OK = "ok"
INFEASIBLE = "infeasible"

KNOB_ALIASES = {"gamma": "episode.gamma", "anchors": "anchors", "way": "episode.train_way"}


def run_experiment(cfg: RunConfig, graph: Optional[Graph] = None) -> tuple[TrainResult, EvalReport]:
    """train + evaluate on the novel classes."""
    ctx = prepare_run(cfg, graph)
    if ctx.novel_pool is None:
        raise InfeasiblePoolError("no novel classes to evaluate on")
    result = train(cfg, ctx)
    report = evaluate(init_model(ctx, result.params), ctx.novel_pool, cfg)
    return result, report


@dataclass(frozen=True)
class SweepPoint:
    overrides: tuple[tuple[str, Any], ...]
    status: str
    report: Optional[EvalReport] = None
    error: Optional[str] = None

    def value(self, key: str) -> Any:
        return dict(self.overrides)[key]


def _run_point(cfg: RunConfig, overrides: dict[str, Any], graph: Graph) -> SweepPoint:
    frozen = tuple(overrides.items())
    try:
        _, report = run_experiment(with_overrides(cfg, overrides), graph)
    except InfeasiblePoolError as e:
        logger.warning("Infeasible point %s: %s", overrides, e)
        return SweepPoint(overrides=frozen, status=INFEASIBLE, error=str(e))
    return SweepPoint(overrides=frozen, status=OK, report=report)


def _sweep(cfg: RunConfig, points: list[dict[str, Any]], graph: Optional[Graph]) -> list[SweepPoint]:
    graph = graph if graph is not None else load_run_graph(cfg)
    return fan_out(lambda overrides: _run_point(cfg, overrides, graph), points)


def diversity_grid(
    cfg: RunConfig,
    fractions: Sequence[float],
    availabilities: Sequence[float],
    graph: Optional[Graph] = None,
) -> list[list[SweepPoint]]:
    """Rows follow `fractions` (class_fraction), columns `availabilities` (label_availability)."""
    points = [
        {"class_fraction": f, "label_availability": a}
        for f in fractions for a in availabilities
    ]
    flat = _sweep(cfg, points, graph)
    width = len(availabilities)
    return [flat[i * width:(i + 1) * width] for i in range(len(fractions))]


def way_sweep(cfg: RunConfig, train_ways: Sequence[int], graph: Optional[Graph] = None) -> list[SweepPoint]:
    """Train at each way in `train_ways`, always evaluate at cfg.episode.n_way."""
    return _sweep(cfg, [{"episode.train_way": w} for w in train_ways], graph)


def sensitivity_sweep(
    cfg: RunConfig,
    knob: str,
    values: Sequence[Any],
    graph: Optional[Graph] = None,
) -> list[SweepPoint]:
    """One experiment per value of `knob` (gamma, anchors, way or any dotted config key)."""
    key = KNOB_ALIASES.get(knob, knob)
    return _sweep(cfg, [{key: v} for v in values], graph)
