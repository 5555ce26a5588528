"""
Dense tensors with recorded reverse-mode gradients.

Each op returns a new Tensor that remembers its parents and a closure
mapping the output gradient to one gradient per parent. `backward` walks
the recorded graph once in reverse topological order. Only tensors with
requires_grad=True record anything; constants and detached tensors are
plain leaves.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from teg.config import settings

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[[np.ndarray], tuple[Optional[np.ndarray], ...]]


class ShapeError(ValueError):
    """Operand shapes do not fit the op."""


class NonFiniteError(FloatingPointError):
    """A forward op produced NaN or Inf."""


def default_dtype() -> np.dtype:
    return np.dtype(settings.dtype)


class Tensor:
    __slots__ = ("data", "requires_grad", "name", "op", "_parents", "_backward")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: Optional[str] = None,
        *,
        op: str = "leaf",
        _parents: tuple["Tensor", ...] = (),
        _backward: Optional[BackwardFn] = None,
    ):
        # Every tensor, constant or not, carries the configured float width
        self.data = np.asarray(data, dtype=default_dtype())
        self.requires_grad = requires_grad
        self.name = name
        self.op = op
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, op="detach")

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __neg__(self) -> "Tensor":
        return scale(self, -1.0)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return matmul(self, other)


def as_tensor(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn: BackwardFn, op: str) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op} produced non-finite values (shape {data.shape})")
    if any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, op=op, _parents=parents, _backward=backward_fn)
    return Tensor(data, op=op)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_check(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op} shape mismatch: {a.shape} vs {b.shape}") from None


# ── Arithmetic ───────────────────────────────────────────────────────

def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("add", a, b)

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), backward, "add")


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("sub", a, b)

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(a.data - b.data, (a, b), backward, "sub")


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("mul", a, b)

    def backward(g: np.ndarray):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), backward, "mul")


def scale(a: ArrayLike, c: float) -> Tensor:
    a = as_tensor(a)

    def backward(g: np.ndarray):
        return (g * c,)

    return _result(a.data * c, (a,), backward, "scale")


def square(a: ArrayLike) -> Tensor:
    a = as_tensor(a)

    def backward(g: np.ndarray):
        return (2.0 * a.data * g,)

    return _result(a.data * a.data, (a,), backward, "square")


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} @ {b.shape}")

    def backward(g: np.ndarray):
        return g @ b.data.T, a.data.T @ g

    return _result(a.data @ b.data, (a, b), backward, "matmul")


def sparse_matmul(s: sp.spmatrix, x: ArrayLike) -> Tensor:
    """Product with a fixed (non-learned) sparse operator."""
    x = as_tensor(x)
    if x.ndim != 2 or s.shape[1] != x.shape[0]:
        raise ShapeError(f"sparse_matmul shape mismatch: {s.shape} @ {x.shape}")
    s_t = s.T.tocsr()

    def backward(g: np.ndarray):
        return (np.asarray(s_t @ g),)

    return _result(np.asarray(s @ x.data), (x,), backward, "sparse_matmul")


def linear(x: ArrayLike, w: ArrayLike, b: Optional[ArrayLike] = None) -> Tensor:
    out = matmul(x, w)
    return out if b is None else add(out, b)


# ── Shape ops ────────────────────────────────────────────────────────

def concat(tensors: Sequence[ArrayLike], axis: int = -1) -> Tensor:
    """Concatenate along the last axis."""
    parts = tuple(as_tensor(t) for t in tensors)
    if not parts:
        raise ShapeError("concat of zero tensors")
    lead = parts[0].shape[:-1]
    for p in parts[1:]:
        if p.shape[:-1] != lead:
            raise ShapeError(f"concat shape mismatch: {parts[0].shape} vs {p.shape}")
    if axis not in (-1, parts[0].ndim - 1):
        raise ShapeError(f"concat supports the last axis only, got axis={axis}")
    cuts = np.cumsum([p.shape[-1] for p in parts])[:-1]

    def backward(g: np.ndarray):
        return tuple(np.split(g, cuts, axis=-1))

    return _result(np.concatenate([p.data for p in parts], axis=-1), parts, backward, "concat")


def gather_rows(a: ArrayLike, index: np.ndarray) -> Tensor:
    a = as_tensor(a)
    index = np.asarray(index, dtype=np.int64)

    def backward(g: np.ndarray):
        out = np.zeros_like(a.data)
        np.add.at(out, index, g)
        return (out,)

    return _result(a.data[index], (a,), backward, "gather_rows")


def scatter_rows(a: ArrayLike, index: np.ndarray, num_rows: int) -> Tensor:
    """out[r] = sum of a[i] over i with index[i] == r."""
    a = as_tensor(a)
    index = np.asarray(index, dtype=np.int64)
    if index.shape[0] != a.shape[0]:
        raise ShapeError(f"scatter_rows shape mismatch: index {index.shape} vs rows {a.shape}")
    out = np.zeros((num_rows,) + a.shape[1:], dtype=a.data.dtype)
    np.add.at(out, index, a.data)

    def backward(g: np.ndarray):
        return (g[index],)

    return _result(out, (a,), backward, "scatter_rows")


# ── Reductions ───────────────────────────────────────────────────────

def reduce_sum(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)

    def backward(g: np.ndarray):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _result(np.asarray(a.data.sum(axis=axis, keepdims=keepdims)), (a,), backward, "sum")


def reduce_mean(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    count = a.data.size if axis is None else a.shape[axis]
    if count == 0:
        raise ShapeError(f"mean over an empty axis of shape {a.shape}")
    return scale(reduce_sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def row_sum(a: ArrayLike) -> Tensor:
    return reduce_sum(a, axis=1, keepdims=True)


def row_mean(a: ArrayLike) -> Tensor:
    return reduce_mean(a, axis=1, keepdims=True)


def pairwise_sqdist(a: ArrayLike, b: ArrayLike) -> Tensor:
    """out[i, j] = ||a_i - b_j||^2."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeError(f"pairwise_sqdist shape mismatch: {a.shape} vs {b.shape}")
    diff = a.data[:, None, :] - b.data[None, :, :]

    def backward(g: np.ndarray):
        weighted = 2.0 * diff * g[:, :, None]
        return weighted.sum(axis=1), -weighted.sum(axis=0)

    return _result(np.einsum("ijk,ijk->ij", diff, diff), (a, b), backward, "pairwise_sqdist")


# ── Nonlinearities ───────────────────────────────────────────────────

def relu(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0

    def backward(g: np.ndarray):
        return (g * mask,)

    return _result(a.data * mask, (a,), backward, "relu")


def silu(a: ArrayLike) -> Tensor:
    """x * sigmoid(x)."""
    a = as_tensor(a)
    s = expit(a.data)

    def backward(g: np.ndarray):
        return (g * (s * (1.0 + a.data * (1.0 - s))),)

    return _result(a.data * s, (a,), backward, "silu")


def dropout(a: ArrayLike, rate: float, rng: Optional[np.random.Generator], train: bool) -> Tensor:
    """Inverted dropout; identity when not training or rate == 0."""
    a = as_tensor(a)
    if not train or rate == 0.0:
        return a
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rng is None:
        raise ValueError("dropout in train mode needs an rng")
    mask = (rng.random(a.shape) >= rate).astype(a.data.dtype) / (1.0 - rate)

    def backward(g: np.ndarray):
        return (g * mask,)

    return _result(a.data * mask, (a,), backward, "dropout")


def log_softmax(a: ArrayLike) -> Tensor:
    """Row-wise log-softmax over the last axis."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    probs = np.exp(out)

    def backward(g: np.ndarray):
        return (g - probs * g.sum(axis=-1, keepdims=True),)

    return _result(out, (a,), backward, "log_softmax")


def nll(log_probs: ArrayLike, targets: np.ndarray) -> Tensor:
    """Summed negative log-likelihood of integer targets, one per row."""
    log_probs = as_tensor(log_probs)
    targets = np.asarray(targets, dtype=np.int64)
    if log_probs.ndim != 2 or targets.shape != (log_probs.shape[0],):
        raise ShapeError(f"nll shape mismatch: log_probs {log_probs.shape} vs targets {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= log_probs.shape[1]):
        raise ValueError(f"nll targets out of range [0, {log_probs.shape[1]})")
    rows = np.arange(targets.shape[0])

    def backward(g: np.ndarray):
        out = np.zeros_like(log_probs.data)
        out[rows, targets] = -g
        return (out,)

    return _result(np.asarray(-log_probs.data[rows, targets].sum()), (log_probs,), backward, "nll")


# ── Reverse pass ─────────────────────────────────────────────────────

def _topological_order(root: Tensor) -> list[Tensor]:
    """Post-order over tensors that require grad (parents before children)."""
    order: list[Tensor] = []
    state: dict[int, int] = {id(root): 1}  # 1 = on stack, 2 = done
    stack: list[tuple[Tensor, int]] = [(root, 0)]
    while stack:
        node, i = stack[-1]
        if i < len(node._parents):
            stack[-1] = (node, i + 1)
            parent = node._parents[i]
            if not parent.requires_grad:
                continue
            seen = state.get(id(parent))
            if seen is None:
                state[id(parent)] = 1
                stack.append((parent, 0))
            else:
                assert seen != 1, "cycle in recorded graph"
        else:
            stack.pop()
            state[id(node)] = 2
            order.append(node)
    return order


def backward(loss: Tensor, params=None) -> dict[str, np.ndarray]:
    """
    Gradients of a scalar loss keyed by parameter name.

    Named leaves reached from the loss get their accumulated gradient.
    When `params` (a ParamStore) is given, every parameter in it gets an
    entry, zeros for the ones the loss does not reach.
    """
    if loss.data.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")

    named: dict[str, np.ndarray] = {}
    if loss.requires_grad:
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for node in reversed(_topological_order(loss)):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                if node.name is not None:
                    named[node.name] = named[node.name] + g if node.name in named else g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                pg = np.asarray(pg, dtype=parent.data.dtype)
                key = id(parent)
                grads[key] = grads[key] + pg if key in grads else pg

    if params is None:
        return named
    out: dict[str, np.ndarray] = {}
    for name in params.names():
        value = params[name]
        grad = named.get(name)
        out[name] = np.zeros_like(value) if grad is None else grad.reshape(value.shape)
    return out
