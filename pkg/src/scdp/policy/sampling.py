"""Denoising-based action sampling and receding-horizon rollouts.

Rollouts may be batched across episodes for throughput; every episode draws
all of its noise from its own generator, so per-episode results depend only
on (scene, episode seed, policy), not on which episodes happen to share a
batch. Within one process the same call is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from scdp.errors import ArgumentError
from scdp.policy.base import BasePolicy
from scdp.rng import Rng
from scdp.world.scenes import A_MAX, Scene, Trajectory

# selector(scene, current_state) -> None for the identity port, or
# (gamma, beta, label) with per-channel vectors of the bottleneck width
FilmSelector = Callable[[Scene, np.ndarray], tuple[np.ndarray, np.ndarray, str] | None]


@dataclass
class RolloutResult:
    trajectory: Trajectory
    success: bool
    steps: int
    decisions: str


def _denoise_batch(
    policy: BasePolicy,
    obs: np.ndarray,
    draws: list[np.ndarray],
    ports: tuple[np.ndarray, np.ndarray] | None,
) -> np.ndarray:
    """Run the reverse diffusion chain; returns denormalized actions.

    Each step forms the implied clean-action estimate, clips it to the
    normalized training-action range, and takes the posterior mean; without
    the clip this is algebraically the plain update
    x_{k-1} = alpha_k (x_k - gamma_k eps_hat) + sigma_k z.
    """
    schedule = policy.schedule
    steps = schedule.steps
    dtype = policy.net.dtype
    ab = schedule.alphabar
    lo = (-policy.norm_clip).astype(dtype)
    hi = policy.norm_clip.astype(dtype)
    x = np.stack([d[0] for d in draws]).astype(dtype)
    kvec = np.empty(len(draws), dtype=np.int64)
    for k in range(steps, 0, -1):
        kvec[:] = k
        eps = policy.net.forward(x, kvec, obs, ports)
        beta = 1.0 - ab[k] / ab[k - 1]
        x0 = (x - np.sqrt(1.0 - ab[k]) * eps) / np.sqrt(ab[k])
        x0 = np.clip(x0, lo, hi)
        if k > 1:
            _, _, sigma = schedule.step_coeffs(k)
            c0 = np.sqrt(ab[k - 1]) * beta / (1.0 - ab[k])
            ck = np.sqrt(ab[k] / ab[k - 1]) * (1.0 - ab[k - 1]) / (1.0 - ab[k])
            z = np.stack([d[steps - k + 1] for d in draws]).astype(dtype)
            x = c0 * x0 + ck * x + sigma * z
        else:
            x = x0
    return policy.denormalize_actions(x.astype(np.float64))


def sample_actions(
    policy: BasePolicy,
    obs: np.ndarray,
    rng: Rng,
    port: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Sample one action sequence of shape (Tp, 2) for a single observation."""
    tp = policy.net.config.horizons.Tp
    draws = rng.normal_shaped((policy.schedule.steps, tp, 2))
    ports = None
    if port is not None:
        gamma, beta = port
        ports = (gamma[None, :].astype(policy.net.dtype),
                 beta[None, :].astype(policy.net.dtype))
    return _denoise_batch(policy, np.asarray(obs, dtype=np.float64)[None, :],
                          [draws], ports)[0]


def _clip_step(a: np.ndarray, a_max: float) -> np.ndarray:
    n = float(np.linalg.norm(a))
    if n > a_max:
        return a * (a_max / n)
    return a


def rollout_many(
    policy: BasePolicy,
    scenes: list[Scene],
    rngs: list[Rng],
    *,
    selectors: list[FilmSelector] | None = None,
    max_steps: int = 150,
    success_radius: float = 0.05,
    a_max: float = A_MAX,
) -> list[RolloutResult]:
    """Receding-horizon execution of a batch of episodes.

    Each replan samples Tp actions, executes up to Ta of them with per-step
    norm clipping, then re-queries the film selector from the new state.
    Episodes stop on goal proximity (success) or after max_steps actions.
    """
    hz = policy.net.config.horizons
    if max_steps < hz.Ta:
        raise ArgumentError(f"max_steps {max_steps} < Ta {hz.Ta}")
    if len(scenes) != len(rngs):
        raise ArgumentError(f"{len(scenes)} scenes vs {len(rngs)} generators")
    n = len(scenes)
    width = policy.net.config.bottleneck_width

    states: list[list[np.ndarray]] = [[np.asarray(s.start, dtype=np.float64)]
                                      for s in scenes]
    decisions = ["" for _ in range(n)]
    success = [False] * n
    goals = [np.asarray(s.goal_star, dtype=np.float64) for s in scenes]
    active = []
    for i in range(n):
        if np.linalg.norm(states[i][0] - goals[i]) < success_radius:
            success[i] = True
        else:
            active.append(i)

    while active:
        obs = np.empty((len(active), 6))
        for row, i in enumerate(active):
            cur = states[i][-1]
            prev = states[i][-2] if len(states[i]) > 1 else states[i][-1]
            obs[row] = np.concatenate([cur, prev, goals[i]])

        ports = None
        if selectors is not None:
            gammas = np.ones((len(active), width), dtype=policy.net.dtype)
            betas = np.zeros((len(active), width), dtype=policy.net.dtype)
            any_port = False
            for row, i in enumerate(active):
                choice = selectors[i](scenes[i], states[i][-1])
                if choice is not None:
                    g, b, label = choice
                    gammas[row] = g
                    betas[row] = b
                    decisions[i] += label
                    any_port = True
            if any_port:
                ports = (gammas, betas)

        draws = [
            rngs[i].normal_shaped((policy.schedule.steps, hz.Tp, 2)) for i in active
        ]
        plans = _denoise_batch(policy, obs, draws, ports)

        still = []
        for row, i in enumerate(active):
            done = False
            for a in plans[row, : hz.Ta]:
                step = _clip_step(a, a_max)
                states[i].append(states[i][-1] + step)
                if np.linalg.norm(states[i][-1] - goals[i]) < success_radius:
                    success[i] = True
                    done = True
                    break
                if len(states[i]) - 1 >= max_steps:
                    done = True
                    break
            if not done:
                still.append(i)
        active = still

    results = []
    for i in range(n):
        traj = Trajectory.from_states(np.asarray(states[i]), scenes[i])
        results.append(
            RolloutResult(
                trajectory=traj,
                success=success[i],
                steps=traj.actions.shape[0],
                decisions=decisions[i],
            )
        )
    return results


def rollout(
    policy: BasePolicy,
    scene: Scene,
    rng: Rng,
    *,
    selector: FilmSelector | None = None,
    max_steps: int = 150,
    success_radius: float = 0.05,
    a_max: float = A_MAX,
) -> RolloutResult:
    """Single-episode convenience wrapper around rollout_many."""
    return rollout_many(
        policy,
        [scene],
        [rng],
        selectors=None if selector is None else [selector],
        max_steps=max_steps,
        success_radius=success_radius,
        a_max=a_max,
    )[0]
