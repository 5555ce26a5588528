"""
Run configuration.

A RunConfig is a small dataclass tree written as flat key=value text with
dotted keys for nested sections:

    seed=0
    episode.n_way=5
    gcn.dropout_rate=0.5

Blank lines and '#' comments are ignored. Values are converted with the
type of the field's default, so a typo'd key or a float where an int is
expected fails with the line number.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Mapping

from teg.embedder.egnn import EgnnConfig
from teg.embedder.task_graph import COMPLETE, MODES
from teg.encoder.gcn import GcnConfig
from teg.episodes.tasks import EpisodeConfig
from teg.graph.synthetic import SbmConfig


class RunConfigError(ValueError):
    """Malformed run configuration text or value."""


@dataclass(frozen=True)
class SplitConfig:
    base: int = 5
    valid: int = 5
    novel: int = 5

    def __post_init__(self) -> None:
        if self.base < 1 or self.valid < 0 or self.novel < 0:
            raise ValueError(f"split needs base >= 1 and non-negative valid/novel, got {self}")

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.base, self.valid, self.novel)


@dataclass(frozen=True)
class OptimConfig:
    lr: float = 0.001
    weight_decay: float = 0.0005

    def __post_init__(self) -> None:
        if self.lr <= 0 or self.weight_decay < 0:
            raise ValueError(f"need lr > 0 and weight_decay >= 0, got {self}")


def _default_sbm() -> SbmConfig:
    return SbmConfig(num_classes=15, nodes_per_class=40)


@dataclass(frozen=True)
class RunConfig:
    dataset: str = ""  # graph file; empty = synthetic graph from `sbm`
    seed: int = 0
    anchors: int = 16
    task_graph: str = COMPLETE
    class_fraction: float = 1.0
    label_availability: float = 1.0
    validation_every: int = 25
    validation_episodes: int = 20
    sbm: SbmConfig = field(default_factory=_default_sbm)
    split: SplitConfig = field(default_factory=SplitConfig)
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    gcn: GcnConfig = field(default_factory=GcnConfig)
    egnn: EgnnConfig = field(default_factory=EgnnConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)

    def __post_init__(self) -> None:
        if self.task_graph not in MODES:
            raise ValueError(f"task_graph must be one of {MODES}, got {self.task_graph!r}")
        if self.anchors < 0:
            raise ValueError(f"anchors must be >= 0, got {self.anchors}")
        if not 0.0 < self.class_fraction <= 1.0 or not 0.0 < self.label_availability <= 1.0:
            raise ValueError(
                f"class_fraction and label_availability must be in (0, 1], "
                f"got {self.class_fraction} and {self.label_availability}"
            )
        if self.validation_every < 1 or self.validation_episodes < 1:
            raise ValueError("validation_every and validation_episodes must be >= 1")


# ── Text form ────────────────────────────────────────────────────────

def _format(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    out: list[tuple[str, Any]] = []
    for f in fields(obj):
        value = getattr(obj, f.name)
        if is_dataclass(value):
            out.extend(_flatten(value, f"{prefix}{f.name}."))
        else:
            out.append((f"{prefix}{f.name}", value))
    return out


def dump_run_config(cfg: RunConfig) -> str:
    return "".join(f"{key}={_format(value)}\n" for key, value in _flatten(cfg))


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(dump_run_config(cfg).encode("utf-8")).hexdigest()[:12]


def _convert(key: str, raw: str, default: Any) -> Any:
    caster = type(default)
    try:
        if caster is bool:
            if raw.lower() not in ("true", "false", "1", "0"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1")
        return caster(raw)
    except ValueError:
        raise RunConfigError(f"bad value for {key}: {raw!r} (expected {caster.__name__})") from None


def _apply(obj: Any, updates: Mapping[str, str], prefix: str = "") -> Any:
    changes: dict[str, Any] = {}
    for f in fields(obj):
        current = getattr(obj, f.name)
        key = f"{prefix}{f.name}"
        if is_dataclass(current):
            nested = {k: v for k, v in updates.items() if k.startswith(key + ".")}
            if nested:
                changes[f.name] = _apply(current, nested, key + ".")
        elif key in updates:
            changes[f.name] = _convert(key, updates[key], current)
    try:
        return dataclasses.replace(obj, **changes)
    except ValueError as e:
        raise RunConfigError(str(e)) from None


def known_keys() -> list[str]:
    return [key for key, _ in _flatten(RunConfig())]


def with_overrides(cfg: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Copy of cfg with dotted keys replaced; values may be text or already typed."""
    known = set(known_keys())
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise RunConfigError(f"unknown config keys: {', '.join(unknown)}")
    return _apply(cfg, {k: _format(v) for k, v in overrides.items()})


def parse_run_config(text: str) -> RunConfig:
    known = set(known_keys())
    updates: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RunConfigError(f"line {line_no}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise RunConfigError(f"line {line_no}: unknown config key {key!r}")
        if key in updates:
            raise RunConfigError(f"line {line_no}: duplicate config key {key!r}")
        updates[key] = value
    return _apply(RunConfig(), updates)


def load_run_config(path: str | Path) -> RunConfig:
    return parse_run_config(Path(path).read_text(encoding="utf-8"))
