"""Bayesian goal inference over partial trajectories.

The observer assumes an agent that approximately minimizes path length: the
posterior over candidate goals given a trajectory prefix compares the cost
spent so far plus the optimal cost-to-go against the optimal cost from the
start,

    P(g | xi_{0..t})  propto  exp(lambda * (-c(xi_{0..t}) - d(s_t, g) + d(s_0, g)))

with a uniform prior over goals. lambda sharpens the cost model; c is the
cumulative polyline length and d the Euclidean distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scdp.errors import ArgumentError

WEIGHT_FNS = ("t_rev", "t", "const")


@dataclass(frozen=True)
class ObserverConfig:
    """Cost sharpness, ambiguity threshold, and temporal weighting choice.

    ``weight_fn`` picks f(t) for the legibility average: "t_rev" gives
    T - t (weights early steps, the default), "t" gives t, "const" gives 1.
    ``burn_in`` is the fraction of a straight-line probe trajectory whose
    prefixes are ignored by the probabilistic ambiguity test; posteriors of
    all goals start indistinguishable at t = 0, so the gap condition is only
    meaningful once part of the motion has been observed.
    """

    lam: float = 5.0
    tau: float = 0.2
    weight_fn: str = "t_rev"
    burn_in: float = 0.5

    def __post_init__(self):
        if self.lam <= 0:
            raise ArgumentError(f"observer lambda must be > 0, got {self.lam}")
        if not 0.0 < self.tau < 1.0:
            raise ArgumentError(f"observer tau must be in (0,1), got {self.tau}")
        if self.weight_fn not in WEIGHT_FNS:
            raise ArgumentError(
                f"unknown weight_fn '{self.weight_fn}', expected one of {WEIGHT_FNS}"
            )
        if not 0.0 <= self.burn_in < 1.0:
            raise ArgumentError(f"burn_in must be in [0,1), got {self.burn_in}")


def _scene_goals(scene) -> np.ndarray:
    return np.vstack([np.asarray(scene.goal_star, dtype=np.float64)]
                     + [np.asarray(g, dtype=np.float64) for g in scene.goals_neg])


def _prefix_posteriors(
    states: np.ndarray, goals: np.ndarray, lam: float
) -> np.ndarray:
    """Posterior over goals for every prefix; rows are prefixes 0..T."""
    states = np.asarray(states, dtype=np.float64)
    steps = np.linalg.norm(np.diff(states, axis=0), axis=1)
    cost = np.concatenate([[0.0], np.cumsum(steps)])  # (T+1,)
    d_t = np.linalg.norm(states[:, None, :] - goals[None, :, :], axis=2)  # (T+1, G)
    d_0 = d_t[0]  # optimal cost from the start
    ex = lam * (-cost[:, None] - d_t + d_0[None, :])
    ex -= ex.max(axis=1, keepdims=True)
    w = np.exp(ex)
    return w / w.sum(axis=1, keepdims=True)


def goal_posterior(states: np.ndarray, scene, cfg: ObserverConfig) -> np.ndarray:
    """Posterior over [goal_star, *goals_neg] given the observed prefix."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if states.shape[0] < 1:
        raise ArgumentError("goal_posterior needs a non-empty trajectory prefix")
    goals = _scene_goals(scene)
    return _prefix_posteriors(states, goals, cfg.lam)[-1]


def _weights(n: int, kind: str) -> np.ndarray:
    t = np.arange(n, dtype=np.float64)
    if kind == "t_rev":
        w = (n - 1) - t
    elif kind == "t":
        w = t
    else:
        w = np.ones(n)
    if w.sum() == 0.0:  # degenerate single-state trajectory
        w = np.ones(n)
    return w


def legibility_score(states: np.ndarray, scene, cfg: ObserverConfig) -> float:
    """Time-weighted average posterior of the true goal; in [0, 1]."""
    states = np.asarray(states, dtype=np.float64)
    goals = _scene_goals(scene)
    post = _prefix_posteriors(states, goals, cfg.lam)[:, 0]
    w = _weights(post.shape[0], cfg.weight_fn)
    return float((post * w).sum() / w.sum())


def probabilistic_ambiguity(
    scene, cfg: ObserverConfig, steps: int = 48
) -> bool:
    """Reference ambiguity test on a straight-line probe toward the goal.

    Discretizes the segment start -> goal_star into ``steps`` states and asks
    whether, past the burn-in prefix, some distractor keeps the posterior gap
    P(goal_star) - P(distractor) below tau at its worst moment.
    """
    if len(scene.goals_neg) == 0:
        return False
    start = np.asarray(scene.start, dtype=np.float64)
    target = np.asarray(scene.goal_star, dtype=np.float64)
    u = np.linspace(0.0, 1.0, steps)[:, None]
    probe = start[None, :] * (1.0 - u) + target[None, :] * u
    goals = _scene_goals(scene)
    post = _prefix_posteriors(probe, goals, cfg.lam)
    first = max(1, int(np.ceil(cfg.burn_in * (post.shape[0] - 1))))
    gaps = post[first:, 0:1] - post[first:, 1:]
    return bool(gaps.min() < cfg.tau)
