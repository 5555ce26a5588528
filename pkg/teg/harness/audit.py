"""
Equivariance audit.

A fixed set of episodes is scored once as-is and once per random rigid
transform of the episode's GCN rows (rows @ Q + lambda, optionally plus
Gaussian noise). Only the transform varies between passes; support/query
roles stay frozen.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from typing import Iterable, Optional, Sequence

import numpy as np

from teg import trace_logger
from teg.concurrency import fan_out
from teg.episodes.tasks import MetaTask
from teg.harness.model import TegModel
from teg.numerics.rng import child_rng, child_seed

logger = logging.getLogger(__name__)

LAMBDA_RANGE = (-5.0, 5.0)
_MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class TransformSpec:
    q: np.ndarray  # d_l x d_l orthogonal
    lam: float     # every entry of the translation G
    noise_sigma: float = 0.0
    seed: int = 0

    @property
    def dim(self) -> int:
        return int(self.q.shape[0])

    def translation(self, rows: int) -> np.ndarray:
        return np.full((rows, self.dim), self.lam)

    def apply(self, rows: np.ndarray, episode: int = 0) -> np.ndarray:
        out = rows @ self.q + self.translation(rows.shape[0])
        if self.noise_sigma > 0:
            out = out + self.noise_sigma * child_rng(self.seed, "noise", episode).standard_normal(out.shape)
        return out

    def for_episode(self, episode: int):
        return partial(self.apply, episode=episode)


def identity_transform(dim: int) -> TransformSpec:
    return TransformSpec(q=np.eye(dim), lam=0.0)


def make_transform(
    dim: int,
    lam_range: tuple[float, float] = LAMBDA_RANGE,
    noise_sigma: float = 0.0,
    seed: int = 0,
    max_redraws: int = 8,
) -> TransformSpec:
    """Q from the QR factorisation of a seeded Gaussian matrix (sign-fixed), lambda uniform in lam_range."""
    if dim < 1:
        raise ValueError(f"transform dimension must be >= 1, got {dim}")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    rng = child_rng(seed, "transform")
    for attempt in range(max_redraws + 1):
        gaussian = rng.standard_normal((dim, dim))
        if np.linalg.cond(gaussian) < _MAX_CONDITION:
            break
        logger.debug("make_transform: near-singular draw %d, redrawing", attempt)
    else:
        raise RuntimeError(f"make_transform: no well-conditioned draw in {max_redraws + 1} attempts")
    q, r = np.linalg.qr(gaussian)
    q = q * np.sign(np.diag(r))
    lam = float(rng.uniform(*lam_range))
    return TransformSpec(q=q, lam=lam, noise_sigma=noise_sigma, seed=seed)


def make_transforms(dim: int, count: int = 10, noise_sigma: float = 0.0, seed: int = 0) -> list[TransformSpec]:
    return [make_transform(dim, noise_sigma=noise_sigma, seed=child_seed(seed, "audit", i)) for i in range(count)]


@dataclass(frozen=True)
class AuditReport:
    acc_reference: float
    acc_transformed: tuple[float, ...]  # one per transform
    agreement: float                    # fraction of (transform, query) predictions equal to the reference
    queries: int
    noise_sigma: float = 0.0

    @property
    def mean_transformed(self) -> float:
        return float(np.mean(self.acc_transformed)) if self.acc_transformed else self.acc_reference

    @property
    def gap_points(self) -> float:
        return abs(self.acc_reference - self.mean_transformed) * 100.0

    def summary(self) -> dict:
        return {
            "acc_reference": self.acc_reference,
            "acc_transformed": self.mean_transformed,
            "gap_points": self.gap_points,
            "agreement": self.agreement,
            "transforms": len(self.acc_transformed),
            "queries": self.queries,
            "noise_sigma": self.noise_sigma,
        }


def _predict_all(model: TegModel, episodes: Sequence[MetaTask], gamma: float, spec: Optional[TransformSpec]) -> np.ndarray:
    h_all = model.graph_embeddings(train_mode=False)

    def run(item: tuple[int, MetaTask]) -> np.ndarray:
        i, task = item
        transform = spec.for_episode(i) if spec is not None else None
        return model.predict_episode(task, h_all, gamma, transform)[0]

    return np.concatenate(fan_out(run, list(enumerate(episodes))))


def equivariance_audit(
    model: TegModel,
    episodes: Sequence[MetaTask],
    transforms: Iterable[TransformSpec],
    gamma: float,
    run_id: str = "",
) -> AuditReport:
    if not episodes:
        raise ValueError("equivariance_audit needs at least one episode")
    transforms = list(transforms)
    labels = np.concatenate([task.query_labels for task in episodes])

    reference = _predict_all(model, episodes, gamma, None)
    acc_transformed = []
    agree = 0
    for spec in transforms:
        predicted = _predict_all(model, episodes, gamma, spec)
        acc_transformed.append(float(np.mean(predicted == labels)))
        agree += int(np.sum(predicted == reference))

    sigmas = {spec.noise_sigma for spec in transforms}
    report = AuditReport(
        acc_reference=float(np.mean(reference == labels)),
        acc_transformed=tuple(acc_transformed),
        agreement=agree / (len(transforms) * labels.shape[0]) if transforms else 1.0,
        queries=int(labels.shape[0]),
        noise_sigma=max(sigmas) if sigmas else 0.0,
    )
    trace_logger.log_audit(
        run_id=run_id,
        transforms=len(transforms),
        acc_reference=report.acc_reference,
        acc_transformed=report.mean_transformed,
        agreement=report.agreement,
        noise_sigma=report.noise_sigma,
    )
    logger.info(
        "Audit: reference %.4f, transformed %.4f (gap %.2f points), agreement %.4f over %d queries x %d transforms",
        report.acc_reference, report.mean_transformed, report.gap_points, report.agreement,
        report.queries, len(transforms),
    )
    return report


def noise_sweep(
    model: TegModel,
    episodes: Sequence[MetaTask],
    sigmas: Sequence[float],
    gamma: float,
    seed: int = 0,
    transforms: int = 10,
    run_id: str = "",
) -> list[AuditReport]:
    """One audit per noise level, each with freshly drawn transforms under the same seed."""
    dim = model.gcn.output_dim
    return [
        equivariance_audit(model, episodes, make_transforms(dim, transforms, sigma, seed), gamma, run_id)
        for sigma in sigmas
    ]
