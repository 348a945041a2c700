"""Dataset-anchored min-max normalization of metric values.

Statistics come from the training demonstrations only; evaluation values are
mapped affinely and NOT clamped, so a rollout more extreme than anything in
the training set maps outside [0, 1] on purpose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from scdp.errors import NormalizerError
from scdp.evalcli.metrics import detachment, efficiency

QUANTITIES = ("detachment", "efficiency", "j")


@dataclass
class Normalizer:
    """Per-quantity (min, max) bounds with affine application."""

    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)

    def normalize(self, value: float, key: str) -> float:
        lo, hi = self.bounds[key]
        return (float(value) - lo) / (hi - lo)

    def to_json(self) -> str:
        return json.dumps(
            {k: [repr(v[0]), repr(v[1])] for k, v in sorted(self.bounds.items())}
        )

    @classmethod
    def from_json(cls, text: str) -> "Normalizer":
        raw = json.loads(text)
        return cls({k: (float(v[0]), float(v[1])) for k, v in raw.items()})


def fit_normalizer(demos, eps: float = 1e-6) -> Normalizer:
    """Min/max of detachment, efficiency, and goal separation over demos.

    Uses each demo's first distractor goal (evaluation scenes carry exactly
    one). Raises if fewer than two demos or any quantity is degenerate.
    """
    if len(demos) < 2:
        raise NormalizerError(
            f"normalizer needs >= 2 demos with distinct values, got {len(demos)}"
        )
    values = {k: [] for k in QUANTITIES}
    for demo in demos:
        scene = demo.trajectory.scene
        g_neg = np.asarray(scene.goals_neg[0], dtype=np.float64)
        states = demo.trajectory.states
        values["detachment"].append(detachment(states, g_neg))
        values["efficiency"].append(efficiency(states, eps))
        values["j"].append(
            float(np.linalg.norm(np.asarray(scene.goal_star) - g_neg))
        )
    bounds = {}
    for key, vals in values.items():
        lo, hi = float(min(vals)), float(max(vals))
        if not hi > lo:
            raise NormalizerError(f"degenerate {key} range: min == max == {lo}")
        bounds[key] = (lo, hi)
    return Normalizer(bounds)
