"""Finite-difference verification of backpropagated gradients."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, backward


def numeric_grad(loss_fn, p: Tensor, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of ``loss_fn()`` w.r.t. every entry of ``p``.

    ``loss_fn`` must recompute the loss from current parameter values; run
    this in float64 mode or the differences drown in rounding noise.
    """
    g = np.zeros_like(p.data)
    flat = p.data.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + step
        hi = float(loss_fn().data)
        flat[i] = keep - step
        lo = float(loss_fn().data)
        flat[i] = keep
        gflat[i] = (hi - lo) / (2.0 * step)
    return g


def check_gradients(loss_fn, params: dict[str, Tensor], step: float = 1e-5,
                    rel_tol: float = 1e-3, abs_floor: float = 1e-6) -> dict[str, float]:
    """Compare analytic gradients against central differences.

    Returns the worst relative error per parameter; raises AssertionError
    when any entry exceeds ``rel_tol``.  ``abs_floor`` bounds the relative
    denominator from below: central differences at this step size carry
    roundoff noise around 1e-10, so differences between gradients smaller
    than the floor are numerically meaningless.
    """
    for p in params.values():
        p.grad = None
    loss = loss_fn()
    backward(loss)
    analytic = {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
                for name, p in params.items()}
    worst: dict[str, float] = {}
    for name, p in params.items():
        num = numeric_grad(loss_fn, p, step=step)
        ana = analytic[name]
        denom = np.maximum(np.maximum(np.abs(num), np.abs(ana)), abs_floor)
        rel = np.abs(num - ana) / denom
        rel[(np.abs(num) < abs_floor) & (np.abs(ana) < abs_floor)] = 0.0
        worst[name] = float(rel.max()) if rel.size else 0.0
        if worst[name] > rel_tol:
            idx = np.unravel_index(int(np.argmax(rel)), rel.shape) if rel.ndim else ()
            raise AssertionError(
                f"gradient mismatch for {name}{list(idx)}: analytic={ana[idx]:.6g} "
                f"numeric={num[idx]:.6g} rel={worst[name]:.3g}")
    return worst
