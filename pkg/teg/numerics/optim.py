"""
Adam with weight decay folded into the gradient as an L2 term.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from teg.numerics.params import ParamStore
from teg.numerics.tensor import ShapeError


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0005
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: ParamStore, **hyper: float) -> "AdamState":
        state = cls(**hyper)
        for name, value in params.items():
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        return state

    def snapshot(self) -> "AdamState":
        return dataclasses.replace(
            self,
            m={name: value.copy() for name, value in self.m.items()},
            v={name: value.copy() for name, value in self.v.items()},
        )


def adam_step(
    params: ParamStore,
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> tuple[ParamStore, AdamState]:
    """One Adam update in place; returns (params, state) for chaining."""
    names = params.names()
    if set(grads) != set(names):
        missing = sorted(set(names) - set(grads))
        extra = sorted(set(grads) - set(names))
        raise ValueError(f"gradient keys do not match parameters (missing={missing}, extra={extra})")

    state.step += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.step
    correction2 = 1.0 - b2 ** state.step

    for name in names:
        p = params[name]
        g = np.asarray(grads[name])
        if g.shape != p.shape:
            raise ShapeError(f"gradient for {name} shape mismatch: {p.shape} vs {g.shape}")
        if state.weight_decay:
            g = g + state.weight_decay * p
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)

    return params, state
