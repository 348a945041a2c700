"""Trajectory metrics: detachment, efficiency, transparency weighting.

All functions take raw state arrays of shape (T+1, 2); the first row is the
start state s_0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scdp.errors import ArgumentError


@dataclass(frozen=True)
class TransparencyParams:
    """Sigmoid steepness and midpoint for the ambiguity weight."""

    u: float = 2.5
    x0: float = 0.5
    swap_weights: bool = False

    def __post_init__(self):
        if self.u <= 0:
            raise ArgumentError(f"steepness u must be > 0, got {self.u}")
        if not 0.0 < self.x0 < 1.0:
            raise ArgumentError(f"midpoint x0 must be in (0,1), got {self.x0}")


def detachment(states: np.ndarray, g_neg: np.ndarray) -> float:
    """Sum over steps t >= 1 of ||g_neg - s_t|| / t.

    s_0 is excluded (division by the step index starts at 1); early steps
    dominate, so staying far from the distractor early scores high.
    """
    states = np.asarray(states, dtype=np.float64)
    if states.shape[0] < 2:
        raise ArgumentError("detachment needs a trajectory of length >= 2")
    g_neg = np.asarray(g_neg, dtype=np.float64)
    rest = states[1:]
    t = np.arange(1, rest.shape[0] + 1, dtype=np.float64)
    return float((np.linalg.norm(g_neg[None, :] - rest, axis=1) / t).sum())


def efficiency(states: np.ndarray, eps: float = 1e-6) -> float:
    """Reciprocal of total path length, stabilized by ``eps``."""
    states = np.asarray(states, dtype=np.float64)
    if states.shape[0] < 2:
        raise ArgumentError("efficiency needs a trajectory of length >= 2")
    if eps <= 0:
        raise ArgumentError(f"eps must be > 0, got {eps}")
    length = float(np.linalg.norm(np.diff(states, axis=0), axis=1).sum())
    return 1.0 / (length + eps)


def w_amb(j_normalized: float, params: TransparencyParams) -> float:
    """Sigmoid weight of efficiency vs detachment from the goal separation."""
    with np.errstate(over="ignore"):  # saturates to 0 for very negative inputs
        return float(1.0 / (1.0 + np.exp(-params.u * (j_normalized - params.x0))))


def transparency(d_hat: float, e_hat: float, w: float,
                 params: TransparencyParams | None = None) -> float:
    """Convex combination (1 - w) * d_hat + w * e_hat.

    Far-apart goals push w toward 1 so efficiency dominates. Setting
    ``params.swap_weights`` selects the transposed weighting for audits.
    """
    if params is not None and params.swap_weights:
        return float(w * d_hat + (1.0 - w) * e_hat)
    return float((1.0 - w) * d_hat + w * e_hat)


def success(states: np.ndarray, g_star: np.ndarray, radius: float = 0.05) -> bool:
    """True iff the final state is strictly within ``radius`` of the goal."""
    if radius <= 0:
        raise ArgumentError(f"radius must be > 0, got {radius}")
    states = np.asarray(states, dtype=np.float64)
    return bool(np.linalg.norm(states[-1] - np.asarray(g_star)) < radius)
