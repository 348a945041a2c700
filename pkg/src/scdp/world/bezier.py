"""Quadratic Bezier demonstration trajectories."""

from __future__ import annotations

import numpy as np

from scdp.errors import ArgumentError
from scdp.world.scenes import A_MAX, Scene, Trajectory


def bezier_point(
    s0: np.ndarray, p1: np.ndarray, g: np.ndarray, u: float | np.ndarray
) -> np.ndarray:
    """Evaluate (1-u)^2 s0 + 2u(1-u) p1 + u^2 g."""
    u = np.asarray(u, dtype=np.float64)[..., None]
    return (1.0 - u) ** 2 * s0 + 2.0 * u * (1.0 - u) * p1 + u**2 * g


def bezier_demo(
    scene: Scene,
    control_offset: np.ndarray,
    steps: int = 48,
    a_max: float = A_MAX,
) -> Trajectory:
    """Sample a quadratic Bezier from start to goal at uniform parameter steps.

    The control point is the segment midpoint displaced by ``control_offset``.
    ``steps`` counts states; if any resulting step exceeds ``a_max`` the curve
    is re-sampled with proportionally more states, never raising.
    """
    if steps < 2:
        raise ArgumentError(f"steps must be >= 2, got {steps}")
    s0 = np.asarray(scene.start, dtype=np.float64)
    g = np.asarray(scene.goal_star, dtype=np.float64)
    p1 = 0.5 * (s0 + g) + np.asarray(control_offset, dtype=np.float64)
    while True:
        u = np.linspace(0.0, 1.0, steps)
        states = bezier_point(s0, p1, g, u)
        step_len = np.linalg.norm(np.diff(states, axis=0), axis=1)
        longest = float(step_len.max())
        if longest <= a_max:
            return Trajectory.from_states(states, scene)
        steps = int(np.ceil(steps * longest / a_max)) + 1
