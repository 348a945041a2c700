"""Trained-policy container and self-describing checkpoint persistence.

A checkpoint stores every network parameter plus the reserved tensors
"norm.mean" / "norm.std" (action normalization) and "schedule.alphabar",
and a small "config.meta" vector encoding the architecture so the network
can be rebuilt without outside information.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from scdp.errors import CheckpointError
from scdp.nncore.checkpoint import checkpoint_load, checkpoint_save
from scdp.policy.schedule import NoiseSchedule
from scdp.policy.unet import ACTION_DIM, Horizons, PolicyConfig, PolicyNet
from scdp.rng import Rng

RESERVED = ("norm.mean", "norm.std", "norm.clip", "schedule.alphabar", "config.meta")


@dataclass
class BasePolicy:
    """Noise-prediction net plus everything sampling needs.

    ``norm_clip`` is the per-dimension extent of the normalized training
    actions; the sampler clips its running clean-action estimate to this
    range, which keeps the reverse chain inside the data support (the
    clipped update equals the plain one whenever the estimate is in range).
    """

    net: PolicyNet
    schedule: NoiseSchedule
    norm_mean: np.ndarray  # (2,) action mean
    norm_std: np.ndarray  # (2,) action std
    norm_clip: np.ndarray  # (2,) max |normalized action|

    @classmethod
    def create(cls, config: PolicyConfig, schedule: NoiseSchedule, rng: Rng,
               dtype=np.float32) -> "BasePolicy":
        return cls(
            net=PolicyNet(config, rng, dtype=dtype),
            schedule=schedule,
            norm_mean=np.zeros(ACTION_DIM, dtype=np.float64),
            norm_std=np.ones(ACTION_DIM, dtype=np.float64),
            norm_clip=np.full(ACTION_DIM, np.inf, dtype=np.float64),
        )

    def normalize_actions(self, actions: np.ndarray) -> np.ndarray:
        return (actions - self.norm_mean) / self.norm_std

    def denormalize_actions(self, actions: np.ndarray) -> np.ndarray:
        return actions * self.norm_std + self.norm_mean

    def state_tensors(self) -> dict[str, np.ndarray]:
        cfg = self.net.config
        meta = np.array(
            [
                1.0,
                cfg.horizons.To,
                cfg.horizons.Tp,
                cfg.horizons.Ta,
                cfg.groups,
                *cfg.channels,
            ],
            dtype=np.float64,
        )
        tensors = {name: p.data for name, p in sorted(self.net.named_params().items())}
        tensors["norm.mean"] = self.norm_mean.astype(np.float64)
        tensors["norm.std"] = self.norm_std.astype(np.float64)
        tensors["norm.clip"] = self.norm_clip.astype(np.float64)
        tensors["schedule.alphabar"] = self.schedule.alphabar.astype(np.float64)
        tensors["config.meta"] = meta
        return tensors


def save_policy(policy: BasePolicy, path: str) -> None:
    checkpoint_save(policy.state_tensors(), path)


def load_policy(path: str) -> BasePolicy:
    tensors = checkpoint_load(path)
    for key in RESERVED:
        if key not in tensors:
            raise CheckpointError(f"policy checkpoint missing tensor '{key}'")
    meta = tensors["config.meta"]
    if meta[0] != 1.0:
        raise CheckpointError(f"unsupported policy meta version {meta[0]}")
    alphabar = tensors["schedule.alphabar"]
    config = PolicyConfig(
        channels=tuple(int(c) for c in meta[5:8]),
        horizons=Horizons(To=int(meta[1]), Tp=int(meta[2]), Ta=int(meta[3])),
        diffusion_steps=alphabar.shape[0] - 1,
        groups=int(meta[4]),
    )
    params = {k: v for k, v in tensors.items() if k not in RESERVED}
    dtype = next(iter(params.values())).dtype if params else np.float32
    net = PolicyNet(config, Rng(0), dtype=dtype)
    named = net.named_params()
    if set(named) != set(params):
        missing = sorted(set(named) - set(params))
        extra = sorted(set(params) - set(named))
        raise CheckpointError(
            f"parameter names do not match architecture "
            f"(missing {missing[:3]}, unexpected {extra[:3]})"
        )
    for name, p in named.items():
        arr = params[name]
        if arr.shape != p.data.shape:
            raise CheckpointError(
                f"tensor '{name}' has shape {arr.shape}, expected {p.data.shape}"
            )
        p.data = arr.astype(dtype, copy=True)
        p.grad = np.zeros_like(p.data)
    return BasePolicy(
        net=net,
        schedule=NoiseSchedule(steps=alphabar.shape[0] - 1, alphabar=alphabar),
        norm_mean=tensors["norm.mean"].astype(np.float64),
        norm_std=tensors["norm.std"].astype(np.float64),
        norm_clip=tensors["norm.clip"].astype(np.float64),
    )


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
