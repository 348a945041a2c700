"""Goal-inference observer model and spatial-ambiguity detectors."""

from scdp.observer.model import (
    ObserverConfig,
    goal_posterior,
    legibility_score,
    probabilistic_ambiguity,
)
from scdp.observer.ellipse import EllipseConfig, detect_ambiguity, ellipse_matrix

__all__ = [
    "ObserverConfig",
    "goal_posterior",
    "legibility_score",
    "probabilistic_ambiguity",
    "EllipseConfig",
    "detect_ambiguity",
    "ellipse_matrix",
]
