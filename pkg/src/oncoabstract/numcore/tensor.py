"""Dense tensors with reverse-mode automatic differentiation.

Every operation records its inputs and a backward closure on the implicit
tape (the graph of ``_parents`` links).  Calling :func:`backward` on a
scalar loss walks the tape once in reverse topological order and
accumulates gradients into ``.grad`` of every tensor with
``requires_grad=True``.

Values are float32 by default; wrap code in ``with precision("float64"):``
to build 64-bit tensors for finite-difference verification.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible for an operation."""


_STATE = {"dtype": np.float32, "debug_checks": False}


def default_dtype():
    return _STATE["dtype"]


def set_debug_checks(enabled: bool) -> None:
    """Verify every forward result is finite (slow; meant for tests)."""
    _STATE["debug_checks"] = bool(enabled)


@contextmanager
def precision(dtype):
    """Temporarily change the dtype used for newly created tensors."""
    dtype = np.dtype(dtype).type
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported dtype {dtype}")
    prev = _STATE["dtype"]
    _STATE["dtype"] = dtype
    try:
        yield
    finally:
        _STATE["dtype"] = prev


def _check(values: np.ndarray) -> np.ndarray:
    if _STATE["debug_checks"] and not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite value produced by forward op")
    return values


class Tensor:
    """A numpy array plus the bookkeeping needed for backpropagation."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, name=None, _parents=(), _backward=None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(default_dtype())
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{tag})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 or isinstance(shape[0], int) else shape[0])

    def backward(self):
        backward(self)


def param(data, name=None) -> Tensor:
    """A trainable leaf tensor."""
    t = Tensor(np.asarray(data, dtype=default_dtype()), requires_grad=True, name=name)
    return t


def constant(data) -> Tensor:
    return Tensor(data)


def _as_tensor(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=default_dtype()))


def _as_pair(a, b):
    """Coerce to tensors; bare scalars adopt the other operand's dtype."""
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        b = Tensor(np.asarray(b, dtype=a.dtype))
    elif isinstance(b, Tensor) and not isinstance(a, Tensor):
        a = Tensor(np.asarray(a, dtype=b.dtype))
    else:
        a, b = _as_tensor(a), _as_tensor(b)
    return a, b


def _needs_graph(*ts: Tensor) -> bool:
    return any(t.requires_grad or t._parents for t in ts)


def _make(values, parents, backward_fn) -> Tensor:
    _check(values)
    if any(_needs_graph(p) for p in parents):
        return Tensor(values, _parents=tuple(parents), _backward=backward_fn)
    return Tensor(values)


def _accum(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Sum gradient over axes that numpy broadcasting expanded."""
    if g.shape == tuple(shape):
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# forward ops
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = _as_pair(a, b)
    out = a.data + b.data

    def back(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))

    return _make(out, (a, b), back)


def mul(a, b) -> Tensor:
    a, b = _as_pair(a, b)
    out = a.data * b.data

    def back(g):
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))

    return _make(out, (a, b), back)


def matmul(a, b) -> Tensor:
    """Matrix product.

    Supports two layouts: ``x @ W`` where ``W`` is a 2-D weight applied to
    the last axis of ``x``, and stacked batch products where both operands
    share identical leading dimensions.
    """
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 1 or b.ndim < 2:
        raise ShapeError(f"matmul needs matrices, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    if b.ndim == 2:
        out = a.data @ b.data

        def back(g):
            _accum(a, g @ b.data.swapaxes(-1, -2))
            flat_a = a.data.reshape(-1, a.shape[-1])
            flat_g = g.reshape(-1, g.shape[-1])
            _accum(b, flat_a.T @ flat_g)

        return _make(out, (a, b), back)
    if a.shape[:-2] != b.shape[:-2]:
        raise ShapeError(f"matmul batch dimensions differ: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def back(g):
        _accum(a, g @ b.data.swapaxes(-1, -2))
        _accum(b, a.data.swapaxes(-1, -2) @ g)

    return _make(out, (a, b), back)


def sigmoid(x) -> Tensor:
    x = _as_tensor(x)
    out = 1.0 / (1.0 + np.exp(-x.data))

    def back(g):
        _accum(x, g * out * (1.0 - out))

    return _make(out, (x,), back)


def tanh(x) -> Tensor:
    x = _as_tensor(x)
    out = np.tanh(x.data)

    def back(g):
        _accum(x, g * (1.0 - out * out))

    return _make(out, (x,), back)


def relu(x) -> Tensor:
    x = _as_tensor(x)
    out = np.maximum(x.data, 0.0)

    def back(g):
        _accum(x, g * (x.data > 0))

    return _make(out, (x,), back)


def softmax(x, axis=-1, mask=None) -> Tensor:
    """Shift-invariant softmax; ``mask`` (bool array) zeroes excluded slots."""
    x = _as_tensor(x)
    vals = x.data
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        vals = np.where(mask, vals, np.array(-1e30, dtype=vals.dtype))
    shifted = vals - vals.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)
    if mask is not None:
        out = np.where(mask, out, 0.0)

    def back(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        _accum(x, out * (g - dot))

    return _make(out, (x,), back)


def concat(tensors, axis=0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]

    def back(g):
        start = 0
        for t, n in zip(tensors, sizes):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(start, start + n)
            _accum(t, g[tuple(idx)])
            start += n

    return _make(out, tuple(tensors), back)


def stack(tensors, axis=0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    out = np.stack([t.data for t in tensors], axis=axis)

    def back(g):
        for i, t in enumerate(tensors):
            _accum(t, np.take(g, i, axis=axis))

    return _make(out, tuple(tensors), back)


def take(x, key) -> Tensor:
    """Slice / index ``x``; gradients scatter-add back into place."""
    x = _as_tensor(x)
    out = x.data[key]

    def back(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, key, g)
        _accum(x, gx)

    return _make(out, (x,), back)


def reshape(x, shape) -> Tensor:
    x = _as_tensor(x)
    out = x.data.reshape(shape)

    def back(g):
        _accum(x, g.reshape(x.shape))

    return _make(out, (x,), back)


def swapaxes(x, a, b) -> Tensor:
    x = _as_tensor(x)
    out = x.data.swapaxes(a, b)

    def back(g):
        _accum(x, g.swapaxes(a, b))

    return _make(out, (x,), back)


def transpose2d(x) -> Tensor:
    return swapaxes(x, -1, -2)


def sum_(x, axis=None, keepdims=False) -> Tensor:
    x = _as_tensor(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def back(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accum(x, np.broadcast_to(g, x.shape).copy())

    return _make(out, (x,), back)


def mean_(x, axis=None, keepdims=False) -> Tensor:
    x = _as_tensor(x)
    n = x.size if axis is None else x.shape[axis]
    return mul(sum_(x, axis=axis, keepdims=keepdims), 1.0 / n)


def lookup(table, ids) -> Tensor:
    """Embedding lookup: rows of ``table`` gathered by integer ``ids``."""
    table = _as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    out = table.data[ids]

    def back(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids.reshape(-1), g.reshape(-1, table.shape[-1]))
        _accum(table, gt)

    return _make(out, (table,), back)


def cross_entropy(logits, targets) -> Tensor:
    """Mean negative log-likelihood from raw logits (log-sum-exp inside).

    ``logits``: (n, n_classes); ``targets``: int array (n,).
    """
    logits = _as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    if logits.ndim != 2:
        raise ShapeError(f"cross_entropy expects 2-D logits, got {logits.shape}")
    if targets.shape != (logits.shape[0],):
        raise ShapeError(f"targets shape {targets.shape} does not match logits {logits.shape}")
    z = logits.data
    m = z.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(z - m).sum(axis=1))
    nll = lse - z[np.arange(len(targets)), targets]
    out = nll.mean(dtype=z.dtype)

    def back(g):
        p = np.exp(z - lse[:, None])
        p[np.arange(len(targets)), targets] -= 1.0
        _accum(logits, (g / len(targets)) * p)

    return _make(np.asarray(out), (logits,), back)


def layer_norm(x, gamma, beta, eps=1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    x, gamma, beta = _as_tensor(x), _as_tensor(gamma), _as_tensor(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = gamma.data * xhat + beta.data

    def back(g):
        _accum(gamma, _unbroadcast(g * xhat, gamma.shape))
        _accum(beta, _unbroadcast(g, beta.shape))
        gx = g * gamma.data
        m1 = gx.mean(axis=-1, keepdims=True)
        m2 = (gx * xhat).mean(axis=-1, keepdims=True)
        _accum(x, inv * (gx - m1 - xhat * m2))

    return _make(out, (x, gamma, beta), back)


def pad_segments(x, lengths) -> Tensor:
    """Pack a flat run of row blocks into a right-padded (B, S_max, d) tensor.

    ``x`` is (sum(lengths), d); block ``i`` of ``lengths[i]`` rows lands in
    ``out[i, :lengths[i]]``.  Padding rows are zero.
    """
    x = _as_tensor(x)
    lengths = [int(n) for n in lengths]
    if sum(lengths) != x.shape[0]:
        raise ShapeError(f"segment lengths {sum(lengths)} do not cover {x.shape[0]} rows")
    b, smax, d = len(lengths), max(lengths), x.shape[1]
    out = np.zeros((b, smax, d), dtype=x.dtype)
    starts = np.cumsum([0] + lengths[:-1])
    for i, (s, n) in enumerate(zip(starts, lengths)):
        out[i, :n] = x.data[s:s + n]

    def back(g):
        gx = np.empty_like(x.data)
        for i, (s, n) in enumerate(zip(starts, lengths)):
            gx[s:s + n] = g[i, :n]
        _accum(x, gx)

    return _make(out, (x,), back)


def dropout(x, rate, rng, train=True) -> Tensor:
    """Inverted dropout; identity when not training or rate is 0."""
    if not train or rate <= 0.0:
        return _as_tensor(x)
    x = _as_tensor(x)
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return mul(x, Tensor(keep))


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------

def backward(loss: Tensor) -> None:
    """Reverse-mode sweep from a scalar loss over the recorded tape."""
    if loss.data.ndim != 0 and loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    order: list[Tensor] = []
    seen = set()
    stack_ = [(loss, False)]
    while stack_:
        node, processed = stack_.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack_.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    # free intermediate activations; leaves keep their gradients
    for node in order:
        if node._backward is not None:
            node._parents = ()
            node._backward = None
            if not node.requires_grad:
                node.grad = None
