"""
Class splits and training-pool restriction.

Restriction keeps a seeded prefix of a seeded permutation, for classes and
for nodes within each class, so shrinking either knob only removes nodes.
"""
from __future__ import annotations

import logging
import math
from types import MappingProxyType
from typing import Iterable, Optional

import numpy as np

from teg.graph.model import ClassSplit, Graph, LabelPool
from teg.numerics.rng import child_rng

logger = logging.getLogger(__name__)


class InfeasiblePoolError(ValueError):
    """Not enough classes or nodes for the requested episode shape."""


def _ceil_fraction(fraction: float, count: int) -> int:
    # round first so 0.07 * 100 does not ceil to 8
    return math.ceil(round(fraction * count, 9))


def split_classes(graph: Graph, counts: tuple[int, int, int], seed: int) -> ClassSplit:
    """Seeded three-way partition of the graph's classes into base/valid/novel."""
    n_base, n_valid, n_novel = counts
    if min(counts) < 0:
        raise ValueError(f"class counts must be non-negative, got {counts}")
    if n_base + n_valid + n_novel > graph.num_classes:
        raise InfeasiblePoolError(
            f"insufficient classes: requested {n_base}+{n_valid}+{n_novel}="
            f"{n_base + n_valid + n_novel}, graph has {graph.num_classes}"
        )
    order = child_rng(seed, "class-split").permutation(graph.num_classes)
    base = frozenset(int(c) for c in order[:n_base])
    valid = frozenset(int(c) for c in order[n_base:n_base + n_valid])
    novel = frozenset(int(c) for c in order[n_base + n_valid:n_base + n_valid + n_novel])
    return ClassSplit(base_classes=base, valid_classes=valid, novel_classes=novel)


def check_episode_shape(pool: LabelPool, n_way: int, k_shot: int, m_query: int) -> None:
    """Raise InfeasiblePoolError unless the pool supports one N-way K-shot M-query episode."""
    need = k_shot + m_query
    feasible = pool.feasible_classes(need)
    if len(feasible) < n_way:
        sizes = pool.sizes()
        raise InfeasiblePoolError(
            f"pool too small for {n_way}-way {k_shot}-shot {m_query}-query: "
            f"{len(feasible)} of {len(sizes)} classes have >= {need} nodes (sizes {sizes})"
        )


def restrict_pool(
    graph: Graph,
    split: ClassSplit,
    class_fraction: float,
    label_availability: float,
    seed: int,
    episode_shape: Optional[tuple[int, int, int]] = None,
) -> LabelPool:
    """Keep ceil(fraction * |base|) classes and ceil(availability * |class|) nodes of each."""
    if not 0.0 < class_fraction <= 1.0:
        raise ValueError(f"class_fraction must be in (0, 1], got {class_fraction}")
    if not 0.0 < label_availability <= 1.0:
        raise ValueError(f"label_availability must be in (0, 1], got {label_availability}")
    split.check_against(graph)

    base = np.array(sorted(split.base_classes), dtype=np.int64)
    order = child_rng(seed, "pool-classes").permutation(base)
    kept = sorted(int(c) for c in order[:_ceil_fraction(class_fraction, len(base))])

    classes: dict[int, tuple[int, ...]] = {}
    for c in kept:
        nodes = graph.nodes_of_class(c)
        shuffled = child_rng(seed, "pool-nodes", c).permutation(nodes)
        keep = _ceil_fraction(label_availability, len(nodes))
        classes[c] = tuple(sorted(int(v) for v in shuffled[:keep]))

    pool = LabelPool(
        classes=MappingProxyType(classes),
        class_fraction=class_fraction,
        label_availability=label_availability,
        seed=seed,
        source="base",
    )
    logger.debug(
        "restrict_pool: %d/%d classes, %d nodes (fraction=%s availability=%s)",
        len(kept), len(base), pool.num_nodes, class_fraction, label_availability,
    )
    if episode_shape is not None:
        check_episode_shape(pool, *episode_shape)
    return pool


def full_pool(graph: Graph, classes: Iterable[int], source: str = "novel") -> LabelPool:
    """Every labeled node of the given classes."""
    mapping = {int(c): tuple(int(v) for v in graph.nodes_of_class(int(c))) for c in sorted(classes)}
    return LabelPool(classes=MappingProxyType(mapping), source=source)


def class_combinations(pool: LabelPool, n_way: int, per_class: int = 1) -> int:
    """Number of distinct N-class combinations an episode sampler can draw."""
    return math.comb(len(pool.feasible_classes(per_class)), n_way)
