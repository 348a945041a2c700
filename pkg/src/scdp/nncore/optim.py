"""Adam optimizer with bias correction and frozen-parameter support."""

from __future__ import annotations

import numpy as np

from scdp.errors import TrainingError
from scdp.nncore.layers import Parameter


class AdamState:
    """Per-parameter first/second moments plus a shared step counter."""

    def __init__(
        self,
        params: list[Parameter],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = {id(p): np.zeros_like(p.data) for p in params}
        self.v = {id(p): np.zeros_like(p.data) for p in params}
        self._params = list(params)


def adam_step(state: AdamState, params: list[Parameter] | None = None) -> None:
    """Apply one bias-corrected Adam update; frozen parameters are untouched."""
    params = state._params if params is None else params
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for p in params:
        if p.frozen:
            continue
        g = p.grad
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in parameter '{p.name}'")
        m = state.m[id(p)]
        v = state.v[id(p)]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p.data -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


def zero_grads(params: list[Parameter]) -> None:
    for p in params:
        p.zero_grad()
