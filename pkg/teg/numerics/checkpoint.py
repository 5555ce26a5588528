"""
Parameter checkpoints.

    params=<k>\n
    <name> <d_1> ... <d_r>\n  followed by prod(d) little-endian float64 values
    ... (k entries)
    [adam step=<t> lr=<> beta1=<> beta2=<> eps=<> weight_decay=<>\n
     then, per parameter in the same order, m values then v values]
"""
from __future__ import annotations

import io
from pathlib import Path
from typing import Optional

import numpy as np

from teg.numerics.optim import AdamState
from teg.numerics.params import ParamStore

_F8 = np.dtype("<f8")


def _write_array(buf: io.BytesIO, value: np.ndarray) -> None:
    buf.write(np.ascontiguousarray(value, dtype=_F8).tobytes())


def save_checkpoint(path: str | Path, params: ParamStore, adam_state: Optional[AdamState] = None) -> None:
    buf = io.BytesIO()
    buf.write(f"params={len(params)}\n".encode("ascii"))
    for name, value in params.items():
        dims = " ".join(str(d) for d in value.shape)
        buf.write(f"{name} {dims}\n".encode("utf-8"))
        _write_array(buf, value)
    if adam_state is not None:
        s = adam_state
        buf.write(
            f"adam step={s.step} lr={s.lr!r} beta1={s.beta1!r} beta2={s.beta2!r} "
            f"eps={s.eps!r} weight_decay={s.weight_decay!r}\n".encode("ascii")
        )
        for name, value in params.items():
            _write_array(buf, s.m.get(name, np.zeros_like(value)))
            _write_array(buf, s.v.get(name, np.zeros_like(value)))
    Path(path).write_bytes(buf.getvalue())


def _read_array(buf: io.BytesIO, shape: tuple[int, ...], path: Path) -> np.ndarray:
    count = int(np.prod(shape, dtype=np.int64))
    raw = buf.read(count * _F8.itemsize)
    if len(raw) != count * _F8.itemsize:
        raise ValueError(f"{path}: truncated checkpoint")
    return np.frombuffer(raw, dtype=_F8).reshape(shape).copy()


def load_checkpoint(path: str | Path) -> tuple[ParamStore, Optional[AdamState]]:
    path = Path(path)
    buf = io.BytesIO(path.read_bytes())
    header = buf.readline().decode("ascii").strip()
    if not header.startswith("params="):
        raise ValueError(f"{path}: expected 'params=<k>' header, got {header!r}")
    count = int(header.split("=", 1)[1])

    params = ParamStore(dtype=np.float64)
    for _ in range(count):
        fields = buf.readline().decode("utf-8").split()
        if not fields:
            raise ValueError(f"{path}: truncated checkpoint")
        name, shape = fields[0], tuple(int(d) for d in fields[1:])
        params.add_loaded(name, _read_array(buf, shape, path))

    line = buf.readline().decode("ascii").strip()
    if not line:
        return params, None
    if not line.startswith("adam "):
        raise ValueError(f"{path}: unexpected trailer {line!r}")
    hyper = dict(part.split("=", 1) for part in line.split()[1:])
    state = AdamState(
        lr=float(hyper["lr"]),
        beta1=float(hyper["beta1"]),
        beta2=float(hyper["beta2"]),
        eps=float(hyper["eps"]),
        weight_decay=float(hyper["weight_decay"]),
        step=int(hyper["step"]),
    )
    for name, value in params.items():
        state.m[name] = _read_array(buf, value.shape, path)
        state.v[name] = _read_array(buf, value.shape, path)
    return params, state
