"""Scene and trajectory data model plus rejection sampling of scenes.

The workspace is the unit square; both tasks reduce to planar point-mass
kinematics and differ only by their tag. Geometric invariants (points inside
the workspace, goals at least WORKSPACE_MARGIN from the start) are enforced
by the sampler and the dataset loader, not by the constructors, so tests and
rollouts may build degenerate scenes on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scdp.errors import ArgumentError, SamplingError
from scdp.observer.ellipse import EllipseConfig, detect_ambiguity
from scdp.rng import Rng

TASKS = ("block_reach", "navigation")
AMBIGUITY_MODES = ("ambiguous", "clear", "any")
WORKSPACE_MARGIN = 0.1
A_MAX = 0.08


@dataclass
class Scene:
    """Start state, target goal, and distractor goals in [0, 1]^2."""

    task: str
    start: np.ndarray
    goal_star: np.ndarray
    goals_neg: list[np.ndarray]

    def __post_init__(self):
        self.start = np.asarray(self.start, dtype=np.float64)
        self.goal_star = np.asarray(self.goal_star, dtype=np.float64)
        self.goals_neg = [np.asarray(g, dtype=np.float64) for g in self.goals_neg]

    def all_goals(self) -> np.ndarray:
        return np.vstack([self.goal_star] + list(self.goals_neg))

    def check(self, margin: float = WORKSPACE_MARGIN) -> bool:
        pts = np.vstack([self.start, self.all_goals()])
        if pts.min() < 0.0 or pts.max() > 1.0:
            return False
        dists = np.linalg.norm(self.all_goals() - self.start[None, :], axis=1)
        return bool((dists > margin).all())


@dataclass
class Trajectory:
    """Ordered states with per-step position deltas as actions."""

    states: np.ndarray
    actions: np.ndarray
    scene: Scene

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.actions = np.asarray(self.actions, dtype=np.float64).reshape(-1, 2)

    @classmethod
    def from_states(cls, states: np.ndarray, scene: Scene) -> "Trajectory":
        states = np.asarray(states, dtype=np.float64)
        return cls(states=states, actions=np.diff(states, axis=0), scene=scene)

    def path_length(self) -> float:
        return float(np.linalg.norm(self.actions, axis=1).sum())


@dataclass
class Demo:
    """Demonstration trajectory with post-hoc style scores."""

    trajectory: Trajectory
    scores: dict[str, float] = field(default_factory=dict)


def _sample_point(rng: Rng) -> np.ndarray:
    return rng.uniform(2)


def sample_scene(
    task: str,
    rng: Rng,
    mode: str = "any",
    *,
    n_neg: int = 1,
    detector: EllipseConfig = EllipseConfig(),
    margin: float = WORKSPACE_MARGIN,
    max_attempts: int = 10_000,
) -> Scene:
    """Rejection-sample a scene matching the requested ambiguity split.

    The split is decided by the ellipse detector evaluated at the start
    state. Raises SamplingError when the attempt budget runs out.
    """
    if task not in TASKS:
        raise ArgumentError(f"unknown task '{task}', expected one of {TASKS}")
    if mode not in AMBIGUITY_MODES:
        raise ArgumentError(
            f"unknown ambiguity mode '{mode}', expected one of {AMBIGUITY_MODES}"
        )
    for _ in range(max_attempts):
        start = _sample_point(rng)
        goals = [_sample_point(rng) for _ in range(n_neg + 1)]
        scene = Scene(task=task, start=start, goal_star=goals[0], goals_neg=goals[1:])
        if not scene.check(margin):
            continue
        if mode == "any":
            return scene
        ambiguous = detect_ambiguity(scene, scene.start, detector)
        if ambiguous == (mode == "ambiguous"):
            return scene
    raise SamplingError(
        f"no scene matching mode '{mode}' within {max_attempts} attempts"
    )
