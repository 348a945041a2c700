"""Scene enrichment and the autoencoder-trained scene encoder.

A scene with N distractors becomes a vector of N+1 five-blocks: the target
block [gx, gy, 0, 0, 0] anchors the coordinate frame, and each distractor
block [gx, gy, rx, ry, j] carries its absolute position, offset from the
target, and distance to the target. The encoder is a 3-dense-layer MLP
trained with a reconstruction loss; the decoder exists only during
pre-training.
"""

from __future__ import annotations

import numpy as np

from scdp.errors import ArgumentError, CheckpointError, ShapeError, TrainingError
from scdp.nncore.checkpoint import checkpoint_load, checkpoint_save
from scdp.nncore.layers import Dense, Parameter, SiLU
from scdp.nncore.optim import AdamState, adam_step, zero_grads
from scdp.rng import Rng
from scdp.world.scenes import Scene, sample_scene

BLOCK = 5


def enrich_scene(scene: Scene) -> np.ndarray:
    """Concatenated five-blocks [target | distractor_1 | ... | distractor_N]."""
    if len(scene.goals_neg) < 1:
        raise ArgumentError("enrich_scene needs at least one distractor goal")
    target = np.asarray(scene.goal_star, dtype=np.float64)
    blocks = [np.concatenate([target, np.zeros(3)])]
    for g in scene.goals_neg:
        g = np.asarray(g, dtype=np.float64)
        r = g - target
        blocks.append(np.concatenate([g, r, [np.linalg.norm(r)]]))
    return np.concatenate(blocks)


class SceneEncoder:
    """Deterministic scene -> latent map with a training-only decoder."""

    def __init__(
        self,
        n_neg: int = 1,
        latent: int = 16,
        hidden: int = 64,
        *,
        rng: Rng,
        dtype=np.float64,
    ):
        self.n_neg = n_neg
        self.latent = latent
        self.hidden = hidden
        self.in_dim = BLOCK * (n_neg + 1)
        d = dtype
        self.enc = [
            Dense(self.in_dim, hidden, rng=rng, name="enc.fc1", dtype=d),
            Dense(hidden, hidden, rng=rng, name="enc.fc2", dtype=d),
            Dense(hidden, latent, rng=rng, name="enc.fc3", dtype=d),
        ]
        self.dec = [
            Dense(latent, hidden, rng=rng, name="dec.fc1", dtype=d),
            Dense(hidden, hidden, rng=rng, name="dec.fc2", dtype=d),
            Dense(hidden, self.in_dim, rng=rng, name="dec.fc3", dtype=d),
        ]
        self._acts = [SiLU() for _ in range(4)]
        self.holdout_rmse: float | None = None

    def params(self) -> list[Parameter]:
        return [p for layer in self.enc for p in layer.params()]

    def all_params(self) -> list[Parameter]:
        return self.params() + [p for layer in self.dec for p in layer.params()]

    def encode(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.in_dim:
            raise ShapeError(
                f"enriched scene has width {x.shape[-1]}, encoder expects "
                f"{self.in_dim} (N={self.n_neg} distractors)"
            )
        h = self._acts[0].forward(self.enc[0].forward(x))
        h = self._acts[1].forward(self.enc[1].forward(h))
        return self.enc[2].forward(h)

    def encode_scene(self, scene: Scene) -> np.ndarray:
        return self.encode(enrich_scene(scene)[None, :])[0]

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        h = self._acts[2].forward(self.dec[0].forward(self.encode(x)))
        h = self._acts[3].forward(self.dec[1].forward(h))
        return self.dec[2].forward(h)

    def _backward_auto(self, grad: np.ndarray) -> None:
        g = self.dec[2].backward(grad)
        g = self.dec[1].backward(self._acts[3].backward(g))
        g = self.dec[0].backward(self._acts[2].backward(g))
        g = self.enc[2].backward(g)
        g = self.enc[1].backward(self._acts[1].backward(g))
        self.enc[0].backward(self._acts[0].backward(g))


def train_encoder(
    n_scenes: int,
    epochs: int,
    rng: Rng,
    *,
    task: str = "block_reach",
    n_neg: int = 1,
    latent: int = 16,
    hidden: int = 64,
    lr: float = 3e-4,
    batch: int = 64,
) -> SceneEncoder:
    """Autoencode enriched vectors of randomized scenes.

    The last 10% of scenes are held out; their reconstruction RMSE lands in
    ``encoder.holdout_rmse`` (None when epochs == 0, where the untrained
    encoder is returned as-is).
    """
    if n_scenes < 1:
        raise ArgumentError(f"n_scenes must be >= 1, got {n_scenes}")
    encoder = SceneEncoder(n_neg=n_neg, latent=latent, hidden=hidden, rng=rng)
    if epochs == 0:
        return encoder
    xs = np.stack(
        [
            enrich_scene(sample_scene(task, Rng(rng.seed + 1 + i), "any", n_neg=n_neg))
            for i in range(n_scenes)
        ]
    )
    n_hold = max(1, n_scenes // 10) if n_scenes > 1 else 0
    train_x = xs[: n_scenes - n_hold]
    hold_x = xs[n_scenes - n_hold :]
    adam = AdamState(encoder.all_params(), lr=lr)
    for _ in range(epochs):
        order = rng.permutation(train_x.shape[0])
        for lo in range(0, train_x.shape[0], batch):
            xb = train_x[order[lo : lo + batch]]
            recon = encoder.reconstruct(xb)
            diff = recon - xb
            loss = float(np.mean(diff * diff))
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite encoder loss {loss}")
            zero_grads(encoder.all_params())
            encoder._backward_auto((2.0 / diff.size) * diff)
            adam_step(adam)
    if n_hold:
        err = encoder.reconstruct(hold_x) - hold_x
        encoder.holdout_rmse = float(np.sqrt(np.mean(err * err)))
    return encoder


def save_encoder(encoder: SceneEncoder, path: str) -> None:
    tensors = {p.name: p.data for p in encoder.params()}
    tensors["config.meta"] = np.array(
        [1.0, encoder.n_neg, encoder.latent, encoder.hidden], dtype=np.float64
    )
    checkpoint_save(tensors, path)


def load_encoder(path: str) -> SceneEncoder:
    tensors = checkpoint_load(path)
    if "config.meta" not in tensors:
        raise CheckpointError("encoder checkpoint missing 'config.meta'")
    meta = tensors["config.meta"]
    encoder = SceneEncoder(
        n_neg=int(meta[1]), latent=int(meta[2]), hidden=int(meta[3]), rng=Rng(0)
    )
    for p in encoder.params():
        if p.name not in tensors:
            raise CheckpointError(f"encoder checkpoint missing tensor '{p.name}'")
        arr = tensors[p.name]
        if arr.shape != p.data.shape:
            raise CheckpointError(
                f"tensor '{p.name}' has shape {arr.shape}, expected {p.data.shape}"
            )
        p.data = arr.astype(np.float64, copy=True)
        p.grad = np.zeros_like(p.data)
    return encoder
