"""Demonstration dataset generation, style subsets, and JSONL persistence.

Dataset files are bit-reproducible from a seed: floats are serialized with
17 significant digits (full float64 round-trip precision) and each demo is
generated from its own derived seed (master seed + demo index), so demo
generation is order-independent and parallelizable.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from scdp.errors import ArgumentError, DatasetLoadError
from scdp.evalcli.metrics import efficiency
from scdp.observer.model import ObserverConfig, legibility_score
from scdp.rng import Rng
from scdp.world.bezier import bezier_demo
from scdp.world.scenes import A_MAX, TASKS, Demo, Scene, Trajectory, sample_scene

STYLE_SCORE_KEYS = {"legible": "legibility", "efficient": "efficiency"}


def _perpendicular(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return np.array([-v[1], v[0]]) / n


def build_dataset(
    task: str,
    n_demos: int,
    rng: Rng,
    offset_range: tuple[float, float] = (0.0, 0.35),
    *,
    steps: int = 48,
    a_max: float = A_MAX,
    observer_cfg: ObserverConfig = ObserverConfig(),
    eff_eps: float = 1e-6,
) -> list[Demo]:
    """Generate scored Bezier demonstrations on freshly sampled scenes.

    Control offsets are perpendicular to the start->goal segment with
    magnitude uniform in ``offset_range`` and a uniform random sign, covering
    near-optimal straight lines through strongly curved paths.
    """
    if n_demos < 1:
        raise ArgumentError(f"n_demos must be >= 1, got {n_demos}")
    lo, hi = offset_range
    if lo < 0 or hi < lo:
        raise ArgumentError(f"invalid offset range {offset_range}")
    demos = []
    for i in range(n_demos):
        drng = Rng(rng.seed + i)
        scene = sample_scene(task, drng, "any")
        mag = float(drng.uniform(1, lo, hi)[0])
        sign = 1.0 if float(drng.uniform(1)[0]) < 0.5 else -1.0
        offset = sign * mag * _perpendicular(scene.goal_star - scene.start)
        traj = bezier_demo(scene, offset, steps=steps, a_max=a_max)
        demos.append(
            Demo(
                trajectory=traj,
                scores={
                    "legibility": legibility_score(traj.states, scene, observer_cfg),
                    "efficiency": efficiency(traj.states, eff_eps),
                },
            )
        )
    return demos


def select_style_subset(demos: list[Demo], style: str, fraction: float) -> list[Demo]:
    """Top ceil(fraction * n) demos by the style's score, stable by index."""
    if not demos:
        raise ArgumentError("cannot select a subset of an empty demo list")
    if not 0.0 < fraction <= 1.0:
        raise ArgumentError(f"fraction must be in (0, 1], got {fraction}")
    if style not in STYLE_SCORE_KEYS:
        raise ArgumentError(
            f"unknown style '{style}', expected one of {tuple(STYLE_SCORE_KEYS)}"
        )
    key = STYLE_SCORE_KEYS[style]
    order = sorted(range(len(demos)), key=lambda i: (-demos[i].scores[key], i))
    count = math.ceil(fraction * len(demos))
    return [demos[i] for i in sorted(order[:count])]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_points(points) -> str:
    return "[" + ",".join(f"[{_fmt(p[0])},{_fmt(p[1])}]" for p in points) + "]"


def _demo_line(demo: Demo) -> str:
    scene = demo.trajectory.scene
    return (
        '{"task":"%s","start":%s,"goal_star":%s,"goals_neg":%s,'
        '"states":%s,"actions":%s,"scores":{"legibility":%s,"efficiency":%s}}'
        % (
            scene.task,
            _fmt_points([scene.start])[1:-1],
            _fmt_points([scene.goal_star])[1:-1],
            _fmt_points(scene.goals_neg),
            _fmt_points(demo.trajectory.states),
            _fmt_points(demo.trajectory.actions),
            _fmt(demo.scores["legibility"]),
            _fmt(demo.scores["efficiency"]),
        )
    )


def dataset_save(demos: list[Demo], path: str) -> None:
    """Write demos as JSON lines, atomically."""
    text = "".join(_demo_line(d) + "\n" for d in demos)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".dataset-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dataset_load(path: str) -> list[Demo]:
    """Read a JSONL dataset; raises DatasetLoadError with the line number."""
    demos = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetLoadError(f"invalid JSON: {exc.msg}", lineno) from exc
            try:
                task = obj["task"]
                if task not in TASKS:
                    raise DatasetLoadError(f"unknown task tag '{task}'", lineno)
                scene = Scene(
                    task=task,
                    start=np.array(obj["start"], dtype=np.float64),
                    goal_star=np.array(obj["goal_star"], dtype=np.float64),
                    goals_neg=[
                        np.array(g, dtype=np.float64) for g in obj["goals_neg"]
                    ],
                )
                states = np.array(obj["states"], dtype=np.float64)
                actions = np.array(obj["actions"], dtype=np.float64)
                scores = {
                    "legibility": float(obj["scores"]["legibility"]),
                    "efficiency": float(obj["scores"]["efficiency"]),
                }
            except DatasetLoadError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetLoadError(f"malformed demo record: {exc}", lineno) from exc
            if actions.shape[0] != states.shape[0] - 1:
                raise DatasetLoadError(
                    f"{actions.shape[0]} actions for {states.shape[0]} states", lineno
                )
            demos.append(
                Demo(
                    trajectory=Trajectory(states=states, actions=actions, scene=scene),
                    scores=scores,
                )
            )
    return demos
