"""
E(n)-equivariant task embedder.

Each layer reads coordinates (the GCN rows, d_l wide) and properties (the
anchor rows, d_s wide) of the task nodes and updates both:

    m_ij     = phi_m([s_i, s_j, ||x_i - x_j||^2])
    x_i'     = x_i + 1/C * sum_j (x_i - x_j) * phi_l(m_ij)
    s_i'     = phi_s([s_i, sum_j m_ij])

with C = |T| - 1 regardless of the task-graph mode. Coordinates only enter
the messages through squared distances, and the update only moves them
along differences, so rotations, reflections and translations of the
input coordinates commute with the layer.

All edges of a layer are evaluated at once over the task graph's
(receiver, sender) arrays.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from teg.embedder.task_graph import TaskGraph
from teg.episodes.tasks import MetaTask
from teg.numerics.params import INIT_GLOROT, INIT_ZEROS, ParamStore
from teg.numerics.tensor import (
    ShapeError,
    Tensor,
    add,
    as_tensor,
    concat,
    gather_rows,
    linear,
    mul,
    row_sum,
    scale,
    scatter_rows,
    silu,
    square,
    sub,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EgnnConfig:
    layers: int = 2
    message_dim: int = 64
    hidden_dim: int = 64

    def __post_init__(self) -> None:
        if self.layers < 0 or self.message_dim < 1 or self.hidden_dim < 1:
            raise ValueError(
                f"EgnnConfig needs layers >= 0 and positive widths, got {self}"
            )


@dataclass(frozen=True)
class _Dense:
    fan_in: int
    fan_out: int


def _mlp_shapes(config: EgnnConfig, prop_dim: int) -> dict[str, list[_Dense]]:
    h, m = config.hidden_dim, config.message_dim
    return {
        "phi_m": [_Dense(2 * prop_dim + 1, h), _Dense(h, m)],
        "phi_l": [_Dense(m, h), _Dense(h, h), _Dense(h, 1)],
        "phi_s": [_Dense(prop_dim + m, h), _Dense(h, prop_dim)],
    }


_ENDS_ON_ACTIVATION = {"phi_m": True, "phi_l": False, "phi_s": False}


def _param_name(layer: int, mlp: str, index: int, kind: str) -> str:
    return f"egnn.{layer}.{mlp}.{index}.{kind}"


def init_egnn_params(params: ParamStore, config: EgnnConfig, prop_dim: int) -> None:
    """Glorot weights and zero biases for every layer's three MLPs."""
    if prop_dim < 1:
        raise ValueError(f"prop_dim must be >= 1, got {prop_dim}")
    shapes = _mlp_shapes(config, prop_dim)
    for layer in range(config.layers):
        for mlp, stack in shapes.items():
            for i, dense in enumerate(stack):
                params.create(_param_name(layer, mlp, i, "weight"), (dense.fan_in, dense.fan_out), INIT_GLOROT)
                params.create(_param_name(layer, mlp, i, "bias"), (dense.fan_out,), INIT_ZEROS)


def _mlp(x: Tensor, params: ParamStore, layer: int, mlp: str) -> Tensor:
    i = 0
    while _param_name(layer, mlp, i, "weight") in params:
        x = linear(
            x,
            params.tensor(_param_name(layer, mlp, i, "weight")),
            params.tensor(_param_name(layer, mlp, i, "bias")),
        )
        last = _param_name(layer, mlp, i + 1, "weight") not in params
        if not last or _ENDS_ON_ACTIVATION[mlp]:
            x = silu(x)
        i += 1
    if i == 0:
        raise KeyError(f"no parameters for egnn layer {layer} {mlp}")
    return x


def egnn_message(
    props_i: np.ndarray | Tensor,
    props_j: np.ndarray | Tensor,
    sqdist: np.ndarray | Tensor | float,
    params: ParamStore,
    layer: int = 0,
) -> Tensor:
    """
    phi_m over one pair or a batch of pairs.

    props_i / props_j are (d_s,) or (E, d_s); sqdist is a scalar or (E, 1).
    Returns (message_dim,) for a single pair, (E, message_dim) otherwise.
    """
    s_i, s_j, d = as_tensor(props_i), as_tensor(props_j), as_tensor(sqdist)
    single = s_i.ndim == 1
    if single:
        s_i, s_j = Tensor(s_i.data[None, :]), Tensor(s_j.data[None, :])
        d = Tensor(np.asarray(d.data, dtype=s_i.data.dtype).reshape(1, 1))
    if s_i.ndim != 2 or s_i.shape != s_j.shape or d.shape != (s_i.shape[0], 1):
        raise ShapeError(f"egnn_message shape mismatch: {s_i.shape}, {s_j.shape}, sqdist {d.shape}")
    if np.any(d.data < 0):
        raise ValueError("egnn_message needs sqdist >= 0")
    expected = params[_param_name(layer, "phi_m", 0, "weight")].shape[0]
    if 2 * s_i.shape[1] + 1 != expected:
        raise ShapeError(
            f"egnn_message dimension mismatch: props width {s_i.shape[1]} does not fit phi_m input {expected}"
        )
    m = _mlp(concat([s_i, s_j, d]), params, layer, "phi_m")
    return Tensor(m.data[0]) if single else m


def egnn_layer(
    coords: Tensor,
    props: Tensor,
    tg: TaskGraph,
    params: ParamStore,
    layer: int,
) -> tuple[Tensor, Tensor]:
    coords, props = as_tensor(coords), as_tensor(props)
    if coords.ndim != 2 or props.ndim != 2 or coords.shape[0] != tg.num_nodes or props.shape[0] != tg.num_nodes:
        raise ShapeError(
            f"egnn_layer shape mismatch: coords {coords.shape}, props {props.shape}, task graph of {tg.num_nodes} nodes"
        )
    recv, send = tg.receivers, tg.senders

    diff = sub(gather_rows(coords, recv), gather_rows(coords, send))   # E x d_l
    sqdist = row_sum(square(diff))                                     # E x 1
    messages = _mlp(
        concat([gather_rows(props, recv), gather_rows(props, send), sqdist]),
        params, layer, "phi_m",
    )                                                                  # E x message_dim

    weights = _mlp(messages, params, layer, "phi_l")                   # E x 1
    shift = scatter_rows(mul(diff, weights), recv, tg.num_nodes)
    coords_out = add(coords, scale(shift, 1.0 / tg.normalizer))

    aggregated = scatter_rows(messages, recv, tg.num_nodes)
    props_out = _mlp(concat([props, aggregated]), params, layer, "phi_s")
    return coords_out, props_out


@dataclass(frozen=True)
class TaskEmbedding:
    coords: Tensor  # Z^(l), |T| x d_l
    props: Tensor   # Z^(s), |T| x d_s


def embed_task(
    task: MetaTask,
    h_coords: Tensor | np.ndarray,
    h_props: Tensor | np.ndarray,
    params: ParamStore,
    tg: TaskGraph,
    config: Optional[EgnnConfig] = None,
) -> TaskEmbedding:
    """Run the EGNN layers over one episode's gathered GCN and anchor rows."""
    coords, props = as_tensor(h_coords), as_tensor(h_props)
    if coords.shape[0] != task.num_nodes or props.shape[0] != task.num_nodes:
        raise ShapeError(
            f"embed_task expects {task.num_nodes} rows, got coords {coords.shape} and props {props.shape}"
        )
    layers = config.layers if config is not None else count_layers(params)
    for layer in range(layers):
        coords, props = egnn_layer(coords, props, tg, params, layer)
    return TaskEmbedding(coords=coords, props=props)


def count_layers(params: ParamStore) -> int:
    layer = 0
    while _param_name(layer, "phi_m", 0, "weight") in params:
        layer += 1
    return layer
