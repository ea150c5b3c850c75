"""Minimal dense-tensor autodiff and optimization substrate."""

from .tensor import (
    ShapeError,
    Tensor,
    add,
    backward,
    concat,
    constant,
    cross_entropy,
    default_dtype,
    dropout,
    layer_norm,
    lookup,
    matmul,
    mean_,
    mul,
    pad_segments,
    param,
    precision,
    relu,
    reshape,
    set_debug_checks,
    sigmoid,
    softmax,
    stack,
    sum_,
    swapaxes,
    take,
    tanh,
    transpose2d,
)
from .optim import AdamState, adam_step, collect_grads, zero_grads
from .gradcheck import check_gradients, numeric_grad

__all__ = [
    "ShapeError", "Tensor", "add", "backward", "concat", "constant",
    "cross_entropy", "default_dtype", "dropout", "layer_norm", "lookup",
    "matmul", "mean_", "mul", "pad_segments", "param", "precision", "relu",
    "reshape", "set_debug_checks", "sigmoid", "softmax", "stack", "sum_",
    "swapaxes", "take", "tanh", "transpose2d",
    "AdamState", "adam_step", "collect_grads", "zero_grads",
    "check_gradients", "numeric_grad",
]
