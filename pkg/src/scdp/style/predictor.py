"""Style predictor: latent scene context -> bottleneck FiLM parameters.

A 4-dense-layer MLP per style. The two output heads are zero-initialized
and the scale head predicts a residual around 1, so a freshly built
predictor emits the exact identity modulation (gamma = 1, beta = 0) and
post-training starts from the base policy's behavior.
"""

from __future__ import annotations

import numpy as np

from scdp.errors import ArgumentError, CheckpointError
from scdp.nncore.checkpoint import checkpoint_load, checkpoint_save
from scdp.nncore.layers import Dense, Parameter, SiLU
from scdp.rng import Rng

STYLES = ("legible", "predictable")


class StylePredictor:
    def __init__(
        self,
        style: str,
        latent: int = 16,
        width: int = 256,
        hidden: int = 256,
        *,
        rng: Rng,
        dtype=np.float32,
    ):
        if style not in STYLES:
            raise ArgumentError(f"unknown style '{style}', expected one of {STYLES}")
        self.style = style
        self.latent = latent
        self.width = width
        self.hidden = hidden
        d = dtype
        self.trunk = [
            Dense(latent, hidden, rng=rng, name="trunk.fc1", dtype=d),
            Dense(hidden, hidden, rng=rng, name="trunk.fc2", dtype=d),
            Dense(hidden, hidden, rng=rng, name="trunk.fc3", dtype=d),
        ]
        self._acts = [SiLU(), SiLU(), SiLU()]
        self.gamma_head = Dense(hidden, width, rng=rng, name="head.gamma",
                                dtype=d, zero_init=True)
        self.beta_head = Dense(hidden, width, rng=rng, name="head.beta",
                               dtype=d, zero_init=True)

    def params(self) -> list[Parameter]:
        out = [p for layer in self.trunk for p in layer.params()]
        return out + self.gamma_head.params() + self.beta_head.params()

    def predict(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(gamma, beta) of shape (batch, width); gamma = 1 + residual."""
        h = c
        for layer, act in zip(self.trunk, self._acts):
            h = act.forward(layer.forward(h))
        return 1.0 + self.gamma_head.forward(h), self.beta_head.forward(h)

    def backward(self, dgamma: np.ndarray, dbeta: np.ndarray) -> None:
        g = self.gamma_head.backward(dgamma) + self.beta_head.backward(dbeta)
        for layer, act in zip(reversed(self.trunk), reversed(self._acts)):
            g = layer.backward(act.backward(g))


def save_predictor(predictor: StylePredictor, path: str) -> None:
    tensors = {p.name: p.data for p in predictor.params()}
    tensors["config.meta"] = np.array(
        [
            1.0,
            STYLES.index(predictor.style),
            predictor.latent,
            predictor.width,
            predictor.hidden,
        ],
        dtype=np.float64,
    )
    checkpoint_save(tensors, path)


def load_predictor(path: str) -> StylePredictor:
    tensors = checkpoint_load(path)
    if "config.meta" not in tensors:
        raise CheckpointError("predictor checkpoint missing 'config.meta'")
    meta = tensors["config.meta"]
    predictor = StylePredictor(
        style=STYLES[int(meta[1])],
        latent=int(meta[2]),
        width=int(meta[3]),
        hidden=int(meta[4]),
        rng=Rng(0),
    )
    for p in predictor.params():
        if p.name not in tensors:
            raise CheckpointError(f"predictor checkpoint missing tensor '{p.name}'")
        arr = tensors[p.name]
        if arr.shape != p.data.shape:
            raise CheckpointError(
                f"tensor '{p.name}' has shape {arr.shape}, expected {p.data.shape}"
            )
        p.data = arr.astype(p.data.dtype, copy=True)
        p.grad = np.zeros_like(p.data)
    return predictor
