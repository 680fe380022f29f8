# g2p_complexity/tensor.py
"""
Dense numpy-backed tensors with reverse-mode automatic differentiation.

Each op records its parents and a closure mapping the output gradient to
parent gradients. `backward()` walks the recorded graph once in reverse
topological order and accumulates into leaf tensors only, so repeated
calls without `zero_grad` accumulate.
"""
from __future__ import annotations
from contextlib import contextmanager
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import NonFiniteValue, NotScalar, ShapeMismatch, TargetOutOfRange

_STATE = {"dtype": np.float32, "check_finite": False}

GradFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]


def get_dtype() -> type:
    return _STATE["dtype"]


def set_precision(bits: int) -> None:
    if bits not in (32, 64):
        raise ValueError(f"precision must be 32 or 64, got {bits}")
    _STATE["dtype"] = np.float64 if bits == 64 else np.float32


@contextmanager
def precision(bits: int) -> Iterator[None]:
    old = _STATE["dtype"]
    set_precision(bits)
    try:
        yield
    finally:
        _STATE["dtype"] = old


@contextmanager
def finite_checks(enabled: bool = True) -> Iterator[None]:
    old = _STATE["check_finite"]
    _STATE["check_finite"] = bool(enabled)
    try:
        yield
    finally:
        _STATE["check_finite"] = old


class Tensor:
    def __init__(self, data, requires_grad: bool = False, _parents: tuple = (), _grad_fn: GradFn | None = None,
                 _op: str = ""):
        arr = np.asarray(data)
        # user-built tensors take the active precision; op results keep theirs
        if not np.issubdtype(arr.dtype, np.floating) or not _op:
            arr = np.asarray(arr, dtype=get_dtype())
        self.data = arr
        self.requires_grad = bool(requires_grad)
        # trainable leaves start at zero
        self.grad: np.ndarray | None = np.zeros_like(arr) if self.requires_grad and _grad_fn is None else None
        self._parents = _parents
        self._grad_fn = _grad_fn
        self._op = _op

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}, op={self._op or 'leaf'})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def is_leaf(self) -> bool:
        return self._grad_fn is None

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data) if self.requires_grad and self.is_leaf else None

    # ----- operator sugar -----
    def __add__(self, other): return add(self, other)
    def __radd__(self, other): return add(other, self)
    def __sub__(self, other): return add(self, mul(other, -1.0))
    def __rsub__(self, other): return add(other, mul(self, -1.0))
    def __neg__(self): return mul(self, -1.0)
    def __mul__(self, other): return mul(self, other)
    def __rmul__(self, other): return mul(other, self)
    def __matmul__(self, other): return matmul(self, other)

    def reshape(self, *shape) -> "Tensor":
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)

    def transpose(self, *axes) -> "Tensor":
        return transpose(self, axes[0] if len(axes) == 1 and isinstance(axes[0], tuple) else axes)

    def sum(self) -> "Tensor":
        return tsum(self)

    # ----- reverse pass -----
    def backward(self) -> None:
        if self.data.ndim != 0:
            raise NotScalar(self.shape)
        if not self.requires_grad:
            return
        order = _topological_order(self)
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.is_leaf:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._grad_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg


def _topological_order(root: Tensor) -> list[Tensor]:
    """Iterative DFS; every node appears once, after all of its inputs."""
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    return order


def _as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=get_dtype()))


def _result(data: np.ndarray, parents: tuple[Tensor, ...], grad_fn: GradFn, op: str) -> Tensor:
    if _STATE["check_finite"] and not np.all(np.isfinite(data)):
        raise NonFiniteValue(op)
    needs = any(p.requires_grad for p in parents)
    if not needs:
        return Tensor(data, _op=op)
    return Tensor(data, requires_grad=True, _parents=parents, _grad_fn=grad_fn, _op=op)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for i, dim in enumerate(shape):
        if dim == 1 and grad.shape[i] != 1:
            grad = grad.sum(axis=i, keepdims=True)
    return grad


# ---------- elementwise ----------
def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data + b.data
    except ValueError:
        raise ShapeMismatch(a.shape, b.shape, "add") from None

    def grad_fn(g):
        return (_unbroadcast(g, a.shape) if a.requires_grad else None,
                _unbroadcast(g, b.shape) if b.requires_grad else None)
    return _result(out, (a, b), grad_fn, "add")


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    try:
        out = a.data * b.data
    except ValueError:
        raise ShapeMismatch(a.shape, b.shape, "mul") from None

    def grad_fn(g):
        return (_unbroadcast(g * b.data, a.shape) if a.requires_grad else None,
                _unbroadcast(g * a.data, b.shape) if b.requires_grad else None)
    return _result(out, (a, b), grad_fn, "mul")


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return _result(np.where(mask, x.data, 0).astype(x.data.dtype), (x,), lambda g: (g * mask,), "relu")


def tsum(x: Tensor) -> Tensor:
    return _result(np.asarray(x.data.sum()), (x,), lambda g: (np.broadcast_to(g, x.shape).copy(),), "sum")


# ---------- shape ----------
def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    old = x.shape
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeMismatch(old, tuple(shape), "reshape") from None
    return _result(out, (x,), lambda g: (g.reshape(old),), "reshape")


def transpose(x: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    axes = tuple(axes) if axes else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(axes))
    return _result(x.data.transpose(axes), (x,), lambda g: (g.transpose(inverse),), "transpose")


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeMismatch(tensors[0].shape, tensors[-1].shape, "concat") from None
    cuts = np.cumsum([t.shape[axis] for t in tensors])[:-1]
    return _result(out, tuple(tensors), lambda g: tuple(np.split(g, cuts, axis=axis)), "concat")


# ---------- linear algebra ----------
def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    [m,k] @ [k,n] -> [m,n]. Also accepts a batched left operand with a
    2-D right operand, or two batched operands of equal leading shape.
    """
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(a.shape, b.shape, "matmul")
    if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
        raise ShapeMismatch(a.shape, b.shape, "matmul")
    out = np.matmul(a.data, b.data)

    def grad_fn(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        if b.ndim == 2:
            gb = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        else:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return ga, gb
    return _result(out, (a, b), grad_fn, "matmul")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def grad_fn(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)
    return _result(y, (x,), grad_fn, "softmax")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeMismatch(x.shape, gain.shape, "layer_norm")
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered ** 2).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    out = xhat * gain.data + bias.data

    def grad_fn(g):
        dxhat = g * gain.data
        dx = inv_std * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
        lead = tuple(range(x.ndim - 1))
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)
    return _result(out, (x, gain, bias), grad_fn, "layer_norm")


# ---------- lookup / regularization ----------
def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of `table`; backward scatter-adds into the gathered rows."""
    ids = np.asarray(ids, dtype=np.int64)

    def grad_fn(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids, g)
        return (gt,)
    return _result(table.data[ids], (table,), grad_fn, "embedding")


def dropout(x: Tensor, p: float, rng: np.random.Generator | None, training: bool) -> Tensor:
    """Inverted dropout; the identity when not training or p == 0."""
    if not training or p <= 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in train mode needs a random generator")
    keep = (rng.random(x.shape) >= p).astype(x.data.dtype) / (1.0 - p)
    return _result(x.data * keep, (x,), lambda g: (g * keep,), "dropout")


# ---------- loss ----------
def cross_entropy(logits: Tensor, targets: np.ndarray, ignore_id: int = 0) -> Tensor:
    """Mean negative log-likelihood over positions whose target != ignore_id."""
    targets = np.asarray(targets, dtype=np.int64)
    V = logits.shape[-1]
    if targets.shape != logits.shape[:-1]:
        raise ShapeMismatch(logits.shape, targets.shape, "cross_entropy")
    keep = targets != ignore_id
    bad = keep & ((targets < 0) | (targets >= V))
    if bad.any():
        pos = tuple(int(i) for i in np.argwhere(bad)[0])
        raise TargetOutOfRange(pos, int(targets[pos]), V)

    n = int(keep.sum())
    flat = logits.data.reshape(-1, V)
    tflat = np.where(keep, targets, 0).reshape(-1)
    kflat = keep.reshape(-1)
    shifted = flat - flat.max(axis=-1, keepdims=True)
    logsum = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    logp = shifted - logsum
    picked = logp[np.arange(flat.shape[0]), tflat]
    loss = -(picked * kflat).sum() / n if n else 0.0

    def grad_fn(g):
        if n == 0:
            return (np.zeros_like(logits.data),)
        probs = np.exp(logp)
        probs[np.arange(flat.shape[0]), tflat] -= 1.0
        probs *= kflat[:, None] / n
        return ((probs * g).reshape(logits.shape),)
    return _result(np.asarray(loss, dtype=logits.data.dtype), (logits,), grad_fn, "cross_entropy")
