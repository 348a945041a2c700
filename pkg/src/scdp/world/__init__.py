"""Scenes, Bezier demonstrations, and dataset persistence."""

from scdp.world.scenes import (
    A_MAX,
    TASKS,
    WORKSPACE_MARGIN,
    Demo,
    Scene,
    Trajectory,
    sample_scene,
)
from scdp.world.bezier import bezier_demo, bezier_point
from scdp.world.dataset import (
    build_dataset,
    dataset_load,
    dataset_save,
    select_style_subset,
)

__all__ = [
    "A_MAX",
    "TASKS",
    "WORKSPACE_MARGIN",
    "Demo",
    "Scene",
    "Trajectory",
    "sample_scene",
    "bezier_demo",
    "bezier_point",
    "build_dataset",
    "dataset_load",
    "dataset_save",
    "select_style_subset",
]
