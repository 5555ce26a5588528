"""
Synthetic graphs for desk-scale experiments.

generate_sbm: stochastic block model, one block per class, with
class-conditioned Gaussian features. generate_components: a disjoint union
of random components, the sparse many-component shape that makes
in-graph anchors useless.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, fields
from pathlib import Path

import networkx as nx
import numpy as np

from teg.graph.model import Graph
from teg.numerics.rng import child_rng, child_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SbmConfig:
    num_classes: int = 10
    nodes_per_class: int = 50
    p_in: float = 0.1
    p_out: float = 0.01
    feature_dim: int = 32
    class_mean_scale: float = 1.0
    feature_noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.num_classes, self.nodes_per_class, self.feature_dim) < 1:
            raise ValueError(
                f"SbmConfig counts must be >= 1 (num_classes={self.num_classes}, "
                f"nodes_per_class={self.nodes_per_class}, feature_dim={self.feature_dim})"
            )
        if not 0.0 <= self.p_out <= self.p_in <= 1.0:
            raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={self.p_in} p_out={self.p_out}")
        if self.feature_noise_sigma < 0 or self.class_mean_scale < 0:
            raise ValueError("class_mean_scale and feature_noise_sigma must be >= 0")


def _graph_from_nx(g: nx.Graph, features: np.ndarray, labels: np.ndarray) -> Graph:
    edges = np.array(list(g.edges()), dtype=np.int64).reshape(-1, 2)
    return Graph(num_nodes=len(labels), edges=edges, features=features, labels=labels)


def generate_sbm(config: SbmConfig) -> Graph:
    """Stochastic block model with Gaussian features around a per-class mean."""
    sizes = [config.nodes_per_class] * config.num_classes
    probs = [
        [config.p_in if i == j else config.p_out for j in range(config.num_classes)]
        for i in range(config.num_classes)
    ]
    g = nx.stochastic_block_model(sizes, probs, seed=child_seed(config.seed, "sbm-edges"))
    labels = np.repeat(np.arange(config.num_classes, dtype=np.int64), config.nodes_per_class)

    rng = child_rng(config.seed, "sbm-features")
    means = rng.standard_normal((config.num_classes, config.feature_dim)) * config.class_mean_scale
    noise = rng.standard_normal((len(labels), config.feature_dim)) * config.feature_noise_sigma
    features = means[labels] + noise

    graph = _graph_from_nx(g, features, labels)
    logger.info(
        "generate_sbm: %d nodes, %d edges, %d classes (p_in=%s p_out=%s)",
        graph.num_nodes, graph.num_edges, config.num_classes, config.p_in, config.p_out,
    )
    return graph


def generate_components(
    num_components: int,
    nodes_per_component: int,
    p: float,
    feature_dim: int,
    seed: int,
) -> Graph:
    """Disjoint union of G(n, p) components; each component is its own class."""
    if num_components < 1 or nodes_per_component < 1:
        raise ValueError("need at least one component with at least one node")
    parts = [
        nx.gnp_random_graph(nodes_per_component, p, seed=child_seed(seed, "component", c))
        for c in range(num_components)
    ]
    g = nx.disjoint_union_all(parts)
    labels = np.repeat(np.arange(num_components, dtype=np.int64), nodes_per_component)
    features = child_rng(seed, "component-features").standard_normal((len(labels), feature_dim))
    return _graph_from_nx(g, features, labels)


def read_sbm_config(path: str | Path) -> SbmConfig:
    """Parse a key=value SbmConfig file; '#' starts a comment."""
    known = {f.name: f for f in fields(SbmConfig)}
    defaults = SbmConfig()
    values: dict[str, object] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ValueError(f"line {line_no}: unknown SbmConfig key {key!r}")
        caster = type(getattr(defaults, key))
        try:
            values[key] = caster(value)
        except ValueError:
            raise ValueError(f"line {line_no}: bad value for {key}: {value!r}") from None
    return SbmConfig(**values)
