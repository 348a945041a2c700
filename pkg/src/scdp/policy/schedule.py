"""Squared-cosine DDPM noise schedule and the per-step update coefficients.

``alphabar[k]`` is the cumulative signal fraction after k noising steps
(alphabar[0] = 1, strictly decreasing). The reverse update from step k to
k - 1 is

    x_{k-1} = alpha_k * (x_k - gamma_k * eps_hat) + sigma_k * z

with alpha_k = 1/sqrt(1 - beta_k), gamma_k = beta_k / sqrt(1 - alphabar_k),
and sigma_k the posterior standard deviation, which vanishes at the final
denoising step (k = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scdp.errors import ArgumentError
from scdp.rng import Rng

MAX_BETA = 0.999


@dataclass(frozen=True)
class NoiseSchedule:
    """Diffusion step count and cumulative signal coefficients."""

    steps: int
    alphabar: np.ndarray  # (steps + 1,), float64, alphabar[0] == 1

    def __post_init__(self):
        ab = np.asarray(self.alphabar, dtype=np.float64)
        if ab.shape != (self.steps + 1,):
            raise ArgumentError(
                f"alphabar has shape {ab.shape}, expected ({self.steps + 1},)"
            )
        if ab[0] != 1.0 or np.any(np.diff(ab) >= 0.0) or ab[-1] <= 0.0:
            raise ArgumentError("alphabar must start at 1 and strictly decrease to > 0")
        object.__setattr__(self, "alphabar", ab)

    def step_coeffs(self, k: int) -> tuple[float, float, float]:
        """(alpha, gamma, sigma) of the reverse update at step k."""
        if not 1 <= k <= self.steps:
            raise ArgumentError(f"step k={k} outside [1, {self.steps}]")
        ab_k = self.alphabar[k]
        ab_prev = self.alphabar[k - 1]
        beta = 1.0 - ab_k / ab_prev
        alpha = 1.0 / math.sqrt(1.0 - beta)
        gamma = beta / math.sqrt(1.0 - ab_k)
        sigma = math.sqrt(beta * (1.0 - ab_prev) / (1.0 - ab_k))
        return alpha, gamma, sigma


def make_schedule(steps: int, kind: str = "squared_cosine") -> NoiseSchedule:
    """Build the schedule; only the squared-cosine shape is supported."""
    if steps < 1:
        raise ArgumentError(f"diffusion step count must be >= 1, got {steps}")
    if kind != "squared_cosine":
        raise ArgumentError(f"unknown schedule kind '{kind}'")

    def f(t: float) -> float:
        return math.cos((t + 0.008) / 1.008 * math.pi / 2.0) ** 2

    betas = np.empty(steps, dtype=np.float64)
    for k in range(steps):
        betas[k] = min(1.0 - f((k + 1) / steps) / f(k / steps), MAX_BETA)
    alphabar = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
    return NoiseSchedule(steps=steps, alphabar=alphabar)


def forward_noise(
    x0: np.ndarray, k: int, rng: Rng, schedule: NoiseSchedule
) -> tuple[np.ndarray, np.ndarray]:
    """Noise a clean sequence to diffusion step k; returns (x_k, eps)."""
    if not 1 <= k <= schedule.steps:
        raise ArgumentError(f"step k={k} outside [1, {schedule.steps}]")
    x0 = np.asarray(x0)
    eps = rng.normal_shaped(x0.shape, dtype=x0.dtype)
    ab = schedule.alphabar[k]
    x_k = math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * eps
    return x_k, eps
