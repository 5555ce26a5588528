"""
Central-difference gradient checking.

The loss function must be deterministic (dropout off): it is evaluated
twice per sampled coordinate with that coordinate nudged by +h and -h.
"""
from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from teg.numerics.params import ParamStore
from teg.numerics.rng import child_rng
from teg.numerics.tensor import NonFiniteError, Tensor, backward

logger = logging.getLogger(__name__)


def _loss_value(loss_fn: Callable[[], Tensor]) -> float:
    value = float(loss_fn().data)
    if not math.isfinite(value):
        raise NonFiniteError(f"grad_check: loss is not finite ({value})")
    return value


def relative_error(analytic: float, numeric: float, floor: float = 1e-5) -> float:
    """|a - n| / max(|a| + |n|, floor)."""
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: ParamStore,
    h: float = 1e-5,
    sample: int = 20,
    seed: int = 0,
    floor: float = 1e-5,
) -> float:
    """Max relative error between backward() and central differences on `sample` random coordinates."""
    analytic = backward(loss_fn(), params)

    names = params.names()
    sizes = np.array([params[n].size for n in names], dtype=np.int64)
    total = int(sizes.sum())
    if total == 0:
        return 0.0
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    picks = child_rng(seed, "grad-check").choice(total, size=min(sample, total), replace=False)

    worst = 0.0
    worst_at = ""
    for flat in np.sort(picks):
        k = int(np.searchsorted(offsets, flat, side="right") - 1)
        name = names[k]
        idx = np.unravel_index(int(flat - offsets[k]), params[name].shape)
        value = params[name]
        original = float(value[idx])
        try:
            value[idx] = original + h
            f_plus = _loss_value(loss_fn)
            value[idx] = original - h
            f_minus = _loss_value(loss_fn)
        finally:
            value[idx] = original
        numeric = (f_plus - f_minus) / (2.0 * h)
        err = relative_error(float(analytic[name][idx]), numeric, floor)
        if err > worst:
            worst, worst_at = err, f"{name}{list(idx)}"

    logger.debug("grad_check: %d coordinates, max relative error %.3e at %s", len(picks), worst, worst_at)
    return worst
