"""
Deterministic random streams.

Every random draw in the package comes from a Generator derived from
(seed, purpose...) so that results never depend on call order across
unrelated components.
"""
from __future__ import annotations

import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise ValueError(f"stream keys must be non-negative, got {key}")
    return int(key)


def child_rng(seed: int, *path: Key) -> np.random.Generator:
    """Generator for the stream named by `path` under `seed`."""
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def child_seed(seed: int, *path: Key) -> int:
    """A 31-bit integer seed for libraries that want an int (networkx)."""
    return int(child_rng(seed, *path).integers(0, 2**31 - 1))
