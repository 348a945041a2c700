"""Noise-prediction training on demonstration windows.

Windows of Tp actions are extracted at every start index of every
demonstration; past the trajectory end the terminal state repeats, so padded
actions are zero. Each epoch draws ``windows_per_demo`` windows per demo,
a uniform diffusion step, and fresh noise, then regresses the predicted
noise with MSE. The same loop trains the base policy (all network
parameters) and the style predictors (port hook parameters only, base
frozen).
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from scdp.errors import ArgumentError, TrainingError
from scdp.nncore.layers import Parameter
from scdp.nncore.optim import AdamState, adam_step, zero_grads
from scdp.policy.base import BasePolicy
from scdp.policy.unet import OBS_DIM
from scdp.rng import Rng
from scdp.world.scenes import Demo


class PortHook(Protocol):
    """Supplies the bottleneck FiLM port during training and absorbs its grads."""

    def begin(self, demo_indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...

    def backward(self, dgamma: np.ndarray, dbeta: np.ndarray) -> None: ...

    def params(self) -> list[Parameter]: ...


def extract_windows(
    demos: list[Demo], tp: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (window, observation, demo index) triples from the demos."""
    wins, obs, owner = [], [], []
    for d_idx, demo in enumerate(demos):
        states = demo.trajectory.states
        actions = demo.trajectory.actions
        n = actions.shape[0]
        if n < 1:
            raise ArgumentError(f"demo {d_idx} has no actions")
        padded = np.zeros((n + tp, 2))
        padded[:n] = actions
        goal = demo.trajectory.scene.goal_star
        for t in range(n):
            wins.append(padded[t : t + tp])
            prev = states[t - 1] if t >= 1 else states[0]
            obs.append(np.concatenate([states[t], prev, goal]))
            owner.append(d_idx)
    return (
        np.asarray(wins, dtype=np.float64),
        np.asarray(obs, dtype=np.float64),
        np.asarray(owner, dtype=np.int64),
    )


def action_stats(
    demos: list[Demo], tp: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-dimension mean/std/extent over the training windows.

    Statistics are taken over the padded windows rather than the raw
    actions: padding zeros are part of what the network is trained on, and
    excluding them would let a constant-action dimension (std 0) map the
    padding to astronomically large normalized values.
    """
    wins, _, _ = extract_windows(demos, tp)
    flat = wins.reshape(-1, 2)
    mean = flat.mean(axis=0)
    std = np.maximum(flat.std(axis=0), 1e-8)
    normed = (flat - mean) / std
    return mean, std, np.abs(normed).max(axis=0)


def run_noise_training(
    policy: BasePolicy,
    demos: list[Demo],
    epochs: int,
    rng: Rng,
    *,
    lr: float,
    batch: int = 256,
    windows_per_demo: int = 16,
    port_hook: PortHook | None = None,
) -> list[float]:
    """Shared DDPM regression loop; returns the per-epoch mean loss curve."""
    if not demos:
        raise ArgumentError("cannot train on an empty demo list")
    if epochs == 0:
        return []
    tp = policy.net.config.horizons.Tp
    windows, obs_all, owner = extract_windows(demos, tp)
    x_all = policy.normalize_actions(windows).astype(policy.net.dtype)
    obs_all = obs_all.astype(policy.net.dtype)
    n_windows = x_all.shape[0]

    trainable = policy.net.params() if port_hook is None else port_hook.params()
    all_params = policy.net.params() + (port_hook.params() if port_hook else [])
    adam = AdamState(trainable, lr=lr)
    schedule = policy.schedule
    sqrt_ab = np.sqrt(schedule.alphabar)
    sqrt_om = np.sqrt(1.0 - schedule.alphabar)

    n_per_epoch = max(batch, windows_per_demo * len(demos))
    curve = []
    for _ in range(epochs):
        idx = rng.integers(n_per_epoch, 0, n_windows)
        ks = rng.integers(n_per_epoch, 1, schedule.steps + 1)
        noise = rng.normal_shaped((n_per_epoch, tp, 2), dtype=policy.net.dtype)
        losses = []
        for lo in range(0, n_per_epoch, batch):
            sl = slice(lo, min(lo + batch, n_per_epoch))
            rows = idx[sl]
            kb = ks[sl]
            eps = noise[sl]
            coeff_s = sqrt_ab[kb].astype(policy.net.dtype)[:, None, None]
            coeff_n = sqrt_om[kb].astype(policy.net.dtype)[:, None, None]
            x_k = coeff_s * x_all[rows] + coeff_n * eps
            port = port_hook.begin(owner[rows]) if port_hook else None
            pred = policy.net.forward(x_k, kb, obs_all[rows], port)
            diff = pred - eps
            loss = float(np.mean(diff * diff))
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite training loss {loss}")
            zero_grads(all_params)
            policy.net.backward((2.0 / diff.size) * diff)
            if port_hook is not None:
                dgamma, dbeta = policy.net.port_grads
                port_hook.backward(dgamma, dbeta)
            adam_step(adam)
            losses.append(loss)
        curve.append(float(np.mean(losses)))
    return curve


def train_base(
    policy: BasePolicy,
    demos: list[Demo],
    epochs: int,
    rng: Rng,
    *,
    lr: float = 1e-4,
    batch: int = 256,
    windows_per_demo: int = 16,
) -> list[float]:
    """Train the base policy end to end; sets its action normalization."""
    if demos:
        policy.norm_mean, policy.norm_std, policy.norm_clip = action_stats(
            demos, policy.net.config.horizons.Tp
        )
    return run_noise_training(
        policy, demos, epochs, rng,
        lr=lr, batch=batch, windows_per_demo=windows_per_demo,
    )
