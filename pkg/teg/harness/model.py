"""
Run context and the assembled model.

prepare_run does the per-(dataset, seed) work once: graph, class split,
pools, anchors, H^(s) and Â. TegModel holds those read-only inputs plus a
ParamStore and runs one episode forward.
"""
from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from teg.embedder.egnn import EgnnConfig, TaskEmbedding, embed_task, init_egnn_params
from teg.embedder.task_graph import build_task_graph
from teg.encoder.gcn import GcnConfig, NormalizedAdjacency, gcn_forward, init_gcn_params, normalize_adjacency
from teg.episodes.losses import combine_losses, episode_predictions, loss_graph, loss_task
from teg.episodes.tasks import EpisodeConfig, MetaTask, sample_task
from teg.graph.io import load_graph
from teg.graph.model import ClassSplit, Graph, LabelPool
from teg.graph.splits import full_pool, restrict_pool, split_classes
from teg.graph.synthetic import SbmConfig, generate_sbm
from teg.harness.run_config import RunConfig, SplitConfig, config_hash
from teg.numerics.params import ParamStore
from teg.numerics.rng import child_seed
from teg.numerics.tensor import Tensor, default_dtype, gather_rows
from teg.structural.anchors import StructuralFeatures, attach_anchors, build_structural_features

logger = logging.getLogger(__name__)

RowTransform = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class RunContext:
    cfg: RunConfig
    graph: Graph
    split: ClassSplit
    train_pool: LabelPool
    valid_pool: Optional[LabelPool]
    novel_pool: Optional[LabelPool]
    structural: StructuralFeatures
    adjacency: NormalizedAdjacency

    @property
    def run_id(self) -> str:
        return config_hash(self.cfg)


def load_run_graph(cfg: RunConfig) -> Graph:
    return load_graph(cfg.dataset) if cfg.dataset else generate_sbm(cfg.sbm)


def prepare_run(cfg: RunConfig, graph: Optional[Graph] = None) -> RunContext:
    """Build everything a run needs except parameters. Pass `graph` to reuse a loaded one."""
    graph = graph if graph is not None else load_run_graph(cfg)
    ep = cfg.episode
    split = split_classes(graph, cfg.split.counts, cfg.seed)
    train_pool = restrict_pool(
        graph, split, cfg.class_fraction, cfg.label_availability, cfg.seed,
        episode_shape=(ep.training_way, ep.k_shot, ep.m_query),
    )
    valid_pool = full_pool(graph, split.valid_classes, "valid") if split.valid_classes else None
    novel_pool = full_pool(graph, split.novel_classes, "novel") if split.novel_classes else None

    if cfg.anchors > 0:
        structural = build_structural_features(graph, attach_anchors(graph, cfg.anchors, cfg.seed))
    else:
        structural = StructuralFeatures(matrix=np.zeros((graph.num_nodes, 0)))

    ctx = RunContext(
        cfg=cfg,
        graph=graph,
        split=split,
        train_pool=train_pool,
        valid_pool=valid_pool,
        novel_pool=novel_pool,
        structural=structural,
        adjacency=normalize_adjacency(graph),
    )
    logger.info(
        "Prepared run %s: %d nodes, %d edges, %d classes (base=%d valid=%d novel=%d), %d anchors",
        ctx.run_id, graph.num_nodes, graph.num_edges, graph.num_classes,
        len(split.base_classes), len(split.valid_classes), len(split.novel_classes), structural.k,
    )
    return ctx


@dataclass(frozen=True)
class EpisodeForward:
    h_rows: Tensor                       # GCN rows of the task nodes, local order
    embedding: Optional[TaskEmbedding]   # None when gamma == 0


@dataclass(frozen=True, eq=False)
class TegModel:
    params: ParamStore
    adjacency: NormalizedAdjacency
    features: np.ndarray
    props: np.ndarray  # H^(s); a single zero column when the run has no anchors
    gcn: GcnConfig
    egnn: EgnnConfig
    task_graph: str

    def with_params(self, params: ParamStore) -> "TegModel":
        return dataclasses.replace(self, params=params)

    def graph_embeddings(self, train_mode: bool = False, rng: Optional[np.random.Generator] = None) -> Tensor:
        return gcn_forward(self.adjacency, self.features, self.params, self.gcn, train_mode, rng)

    def forward_episode(
        self,
        task: MetaTask,
        h_all: Tensor,
        gamma: float,
        transform: Optional[RowTransform] = None,
    ) -> EpisodeForward:
        nodes = task.nodes
        h_rows = gather_rows(h_all, nodes)
        if transform is not None:
            h_rows = Tensor(transform(h_rows.data))
        if gamma == 0.0:
            return EpisodeForward(h_rows=h_rows, embedding=None)
        tg = build_task_graph(task, self.task_graph)
        embedding = embed_task(task, h_rows, Tensor(self.props[nodes]), self.params, tg, self.egnn)
        return EpisodeForward(h_rows=h_rows, embedding=embedding)

    def episode_loss(self, task: MetaTask, h_all: Tensor, gamma: float) -> tuple[Tensor, Optional[Tensor], Tensor]:
        """(total, task term or None, graph term)."""
        out = self.forward_episode(task, h_all, gamma)
        task_term = loss_task(task, out.embedding.coords) if out.embedding is not None else None
        graph_term = loss_graph(task, out.h_rows)
        return combine_losses(task_term, graph_term, gamma), task_term, graph_term

    def predict_episode(
        self,
        task: MetaTask,
        h_all: Tensor,
        gamma: float,
        transform: Optional[RowTransform] = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Query predictions: task-embedder prototypes, or GCN prototypes at gamma == 0."""
        out = self.forward_episode(task, h_all, gamma, transform)
        rows = out.embedding.coords if out.embedding is not None else out.h_rows
        return episode_predictions(task, rows)


def init_model(ctx: RunContext, params: Optional[ParamStore] = None) -> TegModel:
    """Fresh Glorot parameters for the run, or wrap `params` (e.g. from a checkpoint)."""
    cfg = ctx.cfg
    props = ctx.structural.matrix if ctx.structural.k > 0 else np.zeros((ctx.graph.num_nodes, 1))
    if params is None:
        params = ParamStore(seed=cfg.seed)
        init_gcn_params(params, cfg.gcn, ctx.graph.num_features)
        init_egnn_params(params, cfg.egnn, props.shape[1])
        logger.info("Initialized %d parameters in %d tensors", params.num_parameters(), len(params))
    return TegModel(
        params=params,
        adjacency=ctx.adjacency,
        features=np.asarray(ctx.graph.features, dtype=default_dtype()),
        props=np.asarray(props, dtype=default_dtype()),
        gcn=cfg.gcn,
        egnn=cfg.egnn,
        task_graph=cfg.task_graph,
    )


def episode_cost(
    model: TegModel,
    pool: LabelPool,
    n_way: int,
    k_shot: int,
    m_query: int,
    repeats: int = 3,
    gamma: float = 0.5,
    seed: int = 0,
) -> float:
    """Mean wall-clock seconds for one eval-mode episode forward (GCN + task embedder)."""
    cfg = EpisodeConfig(n_way=n_way, k_shot=k_shot, m_query=m_query)
    task = sample_task(pool, cfg, child_seed(seed, "cost"))
    timings = []
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        model.predict_episode(task, model.graph_embeddings(), gamma)
        timings.append(time.perf_counter() - start)
    return float(np.mean(timings))


def toy_gradient_problem(seed: int = 0) -> tuple[Callable[[], Tensor], ParamStore]:
    """
    Full combined loss on a tiny instance: d_l=4, d_s=3, 2-way 1-shot 1-query,
    dropout off. Returns (loss_fn, params) for grad_check.
    """
    cfg = RunConfig(
        seed=seed,
        anchors=3,
        sbm=SbmConfig(num_classes=2, nodes_per_class=6, p_in=0.5, p_out=0.1, feature_dim=5, seed=seed),
        split=SplitConfig(base=2, valid=0, novel=0),
        episode=EpisodeConfig(n_way=2, k_shot=1, m_query=1, gamma=0.5),
        gcn=GcnConfig(output_dim=4, dropout_rate=0.0),
    )
    ctx = prepare_run(cfg)
    model = init_model(ctx)
    task = sample_task(ctx.train_pool, cfg.episode, child_seed(seed, "toy-task"))

    def loss_fn() -> Tensor:
        total, _, _ = model.episode_loss(task, model.graph_embeddings(), cfg.episode.gamma)
        return total

    return loss_fn, model.params
