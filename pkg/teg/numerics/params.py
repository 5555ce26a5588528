"""
Named parameter storage.

Weights are Glorot-uniform, biases zero. Each parameter draws from its own
stream derived from (seed, name), so adding a parameter never changes the
initial values of the others.
"""
from __future__ import annotations

import copy
import hashlib
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from teg.numerics.rng import child_rng
from teg.numerics.tensor import ShapeError, Tensor, default_dtype

INIT_GLOROT = "glorot"
INIT_ZEROS = "zeros"


@dataclass(frozen=True)
class ParamSpec:
    shape: tuple[int, ...]
    init: str


def glorot_uniform(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    fan_in, fan_out = (shape[0], shape[1]) if len(shape) >= 2 else (shape[0], shape[0])
    limit = math.sqrt(6.0 / max(fan_in + fan_out, 1))
    return rng.uniform(-limit, limit, size=shape)


class ParamStore:
    def __init__(self, seed: int = 0, dtype: Optional[np.dtype] = None):
        self.seed = seed
        self.dtype = np.dtype(dtype) if dtype is not None else default_dtype()
        self._values: dict[str, np.ndarray] = {}
        self._specs: dict[str, ParamSpec] = {}

    def create(self, name: str, shape: tuple[int, ...], init: str = INIT_GLOROT) -> np.ndarray:
        if name in self._values:
            raise ValueError(f"duplicate parameter name: {name}")
        shape = tuple(int(s) for s in shape)
        if init == INIT_GLOROT:
            value = glorot_uniform(shape, child_rng(self.seed, "init", name))
        elif init == INIT_ZEROS:
            value = np.zeros(shape)
        else:
            raise ValueError(f"unknown init {init!r} for {name}")
        self._values[name] = value.astype(self.dtype)
        self._specs[name] = ParamSpec(shape=shape, init=init)
        return self._values[name]

    def add_loaded(self, name: str, value: np.ndarray) -> None:
        if name in self._values:
            raise ValueError(f"duplicate parameter name: {name}")
        self._values[name] = np.array(value, dtype=self.dtype)
        self._specs[name] = ParamSpec(shape=tuple(value.shape), init="loaded")

    def names(self) -> list[str]:
        return list(self._values)

    def spec(self, name: str) -> ParamSpec:
        return self._specs[name]

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(self._values.items())

    def __getitem__(self, name: str) -> np.ndarray:
        return self._values[name]

    def __contains__(self, name: object) -> bool:
        return name in self._values

    def __len__(self) -> int:
        return len(self._values)

    def set(self, name: str, value: np.ndarray) -> None:
        current = self._values[name]
        value = np.asarray(value, dtype=self.dtype)
        if value.shape != current.shape:
            raise ShapeError(f"parameter {name} shape mismatch: {current.shape} vs {value.shape}")
        current[...] = value

    def tensor(self, name: str) -> Tensor:
        """Leaf tensor over the live array; gradients are reported under `name`."""
        return Tensor(self._values[name], requires_grad=True, name=name)

    def num_parameters(self) -> int:
        return int(sum(v.size for v in self._values.values()))

    def snapshot(self) -> "ParamStore":
        """Independent copy, safe to read while the original is being optimised."""
        return copy.deepcopy(self)

    def checksum(self) -> str:
        h = hashlib.sha256()
        for name, value in self._values.items():
            h.update(name.encode("utf-8"))
            h.update(np.ascontiguousarray(value, dtype="<f8").tobytes())
        return h.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParamStore):
            return NotImplemented
        return self.names() == other.names() and all(
            np.array_equal(self[n], other[n]) for n in self.names()
        )

    __hash__ = None  # type: ignore[assignment]
