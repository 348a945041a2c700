"""Elliptical confusion-zone proxy for spatial ambiguity.

An ellipse is placed between the agent's current state and its target so
that the state sits at one focal point; distractor goals falling inside mark
the scene as ambiguous. The center is ``e = s + kappa * (g - s)``; with
goal distance d, the semi-major axis is a = kappa*d / ecc and the focal
distance kappa*d, so the eccentricity parameter controls how fat the zone is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scdp.errors import ArgumentError, DegenerateSceneError


@dataclass(frozen=True)
class EllipseConfig:
    kappa: float = 0.75
    eccentricity: float = 0.9

    def __post_init__(self):
        if not 0.5 < self.kappa < 1.0:
            raise ArgumentError(f"kappa must be in (0.5, 1), got {self.kappa}")
        if not 0.0 < self.eccentricity < 1.0:
            raise ArgumentError(
                f"eccentricity must be in (0, 1), got {self.eccentricity}"
            )


def ellipse_matrix(
    s_t: np.ndarray, g_star: np.ndarray, cfg: EllipseConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Center e and SPD matrix M of the confusion ellipse at state ``s_t``.

    A point p is inside iff (p - e)^T M (p - e) <= 1. The state satisfies
    the focal identity ||s_t - e|| = sqrt(a^2 - b^2).
    """
    s_t = np.asarray(s_t, dtype=np.float64)
    g_star = np.asarray(g_star, dtype=np.float64)
    delta = g_star - s_t
    d = float(np.linalg.norm(delta))
    if d < 1e-12:
        raise DegenerateSceneError(
            "state and target goal coincide; confusion ellipse undefined"
        )
    e = s_t + cfg.kappa * delta
    a = cfg.kappa * d / cfg.eccentricity
    b = a * np.sqrt(1.0 - cfg.eccentricity**2)
    ux, uy = delta / d
    rot = np.array([[ux, -uy], [uy, ux]])
    m = rot @ np.diag([1.0 / a**2, 1.0 / b**2]) @ rot.T
    return e, m


def detect_ambiguity(scene, s_t: np.ndarray | None = None,
                     cfg: EllipseConfig = EllipseConfig()) -> bool:
    """True iff any distractor goal lies inside the confusion ellipse."""
    if len(scene.goals_neg) == 0:
        return False
    if s_t is None:
        s_t = scene.start
    e, m = ellipse_matrix(s_t, scene.goal_star, cfg)
    for g in scene.goals_neg:
        diff = np.asarray(g, dtype=np.float64) - e
        if float(diff @ m @ diff) <= 1.0:
            return True
    return False
