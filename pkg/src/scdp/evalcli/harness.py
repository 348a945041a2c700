"""Evaluation harness: per-episode metric rows and per-split aggregates.

For each split (ambiguous / clear) the harness replays the same per-episode
scenes and noise seeds for every sampled method, so method comparisons are
paired. Methods:

    base_dp       -- frozen base policy, identity bottleneck port
    scdp          -- ambiguity-arbitrated style conditioning
    dataset_stats -- training demonstrations falling in the split, rescored

Episode rows carry raw and normalized detachment/efficiency, the ambiguity
weight, the transparency score, success, and the per-replan style decisions.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from scdp.errors import ArgumentError
from scdp.evalcli.metrics import (
    TransparencyParams,
    detachment,
    efficiency,
    success,
    transparency,
    w_amb,
)
from scdp.evalcli.normalize import Normalizer, fit_normalizer
from scdp.observer.ellipse import detect_ambiguity
from scdp.rng import Rng, derive_seed
from scdp.style.bundle import StyleBundle
from scdp.style.post_train import conditioned_rollout_many
from scdp.policy.sampling import rollout_many
from scdp.world.scenes import sample_scene

SPLITS = ("ambiguous", "clear")
METHODS = ("base_dp", "scdp", "dataset_stats")

CSV_COLUMNS = [
    "episode", "split", "method", "seed", "D", "E", "D_hat", "E_hat",
    "w_amb", "T", "success", "steps", "style_decisions",
]


@dataclass(frozen=True)
class EvalConfig:
    episodes: int = 100
    seed: int = 424242
    splits: tuple[str, ...] = SPLITS
    methods: tuple[str, ...] = METHODS
    max_steps: int = 150
    success_radius: float = 0.05
    metrics_eps: float = 1e-6

    def __post_init__(self):
        if self.episodes < 1:
            raise ArgumentError(f"episodes must be >= 1, got {self.episodes}")
        for s in self.splits:
            if s not in SPLITS:
                raise ArgumentError(f"unknown split '{s}'")
        for m in self.methods:
            if m not in METHODS:
                raise ArgumentError(f"unknown method '{m}'")


@dataclass
class EpisodeRow:
    episode: int
    split: str
    method: str
    seed: int
    D: float
    E: float
    d_hat: float
    e_hat: float
    w: float
    T: float
    success: bool
    steps: int
    decisions: str


@dataclass
class MetricReport:
    rows: list[EpisodeRow] = field(default_factory=list)
    aggregates: dict[str, dict] = field(default_factory=dict)

    def aggregate_of(self, split: str, method: str) -> dict:
        return self.aggregates[f"{split}/{method}"]


def _score_row(
    states: np.ndarray,
    scene,
    normalizer: Normalizer,
    tparams: TransparencyParams,
    eps: float,
    radius: float,
) -> tuple[float, float, float, float, float, float, bool]:
    g_neg = np.asarray(scene.goals_neg[0], dtype=np.float64)
    d_raw = detachment(states, g_neg)
    e_raw = efficiency(states, eps)
    d_hat = normalizer.normalize(d_raw, "detachment")
    e_hat = normalizer.normalize(e_raw, "efficiency")
    j = float(np.linalg.norm(np.asarray(scene.goal_star) - g_neg))
    w = w_amb(normalizer.normalize(j, "j"), tparams)
    t = transparency(d_hat, e_hat, w, tparams)
    return d_raw, e_raw, d_hat, e_hat, w, t, success(states, scene.goal_star, radius)


def _aggregate(rows: list[EpisodeRow]) -> dict:
    def ms(vals):
        arr = np.asarray(vals, dtype=np.float64)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return {"mean": float(arr.mean()), "std": std}

    return {
        "n": len(rows),
        "D_hat": ms([r.d_hat for r in rows]),
        "E_hat": ms([r.e_hat for r in rows]),
        "T": ms([r.T for r in rows]),
        "success_rate": float(np.mean([r.success for r in rows])),
        "mean_steps": float(np.mean([r.steps for r in rows])),
    }


def evaluate(bundle: StyleBundle, cfg: EvalConfig) -> MetricReport:
    """Run every requested (split, method) cell; aggregates are recomputable
    from the emitted rows."""
    if not bundle.demos:
        raise ArgumentError("bundle has no training dataset loaded")
    normalizer = fit_normalizer(bundle.demos, cfg.metrics_eps)
    tparams = bundle.config.transparency()
    ellipse = bundle.ellipse
    report = MetricReport()

    for split in cfg.splits:
        want_ambiguous = split == "ambiguous"
        scenes = []
        scene_seeds = []
        for ep in range(cfg.episodes):
            sseed = derive_seed(cfg.seed, SPLITS.index(split), ep)
            scenes.append(sample_scene(bundle.task, Rng(sseed), split,
                                       detector=ellipse))
            scene_seeds.append(sseed)
        rollout_seeds = [
            derive_seed(cfg.seed, 100 + SPLITS.index(split), ep)
            for ep in range(cfg.episodes)
        ]

        for method in cfg.methods:
            rows = []
            if method == "dataset_stats":
                matching = [
                    (i, d) for i, d in enumerate(bundle.demos)
                    if detect_ambiguity(d.trajectory.scene,
                                        d.trajectory.scene.start, ellipse)
                    == want_ambiguous
                ]
                for i, demo in matching:
                    states = demo.trajectory.states
                    d_raw, e_raw, dh, eh, w, t, ok = _score_row(
                        states, demo.trajectory.scene, normalizer, tparams,
                        cfg.metrics_eps, cfg.success_radius,
                    )
                    rows.append(EpisodeRow(
                        episode=i, split=split, method=method, seed=-1,
                        D=d_raw, E=e_raw, d_hat=dh, e_hat=eh, w=w, T=t,
                        success=ok, steps=demo.trajectory.actions.shape[0],
                        decisions="",
                    ))
            else:
                rngs = [Rng(s) for s in rollout_seeds]
                if method == "scdp":
                    results = conditioned_rollout_many(
                        bundle, scenes, rngs,
                        max_steps=cfg.max_steps,
                        success_radius=cfg.success_radius,
                    )
                else:
                    results = rollout_many(
                        bundle.policy, scenes, rngs,
                        max_steps=cfg.max_steps,
                        success_radius=cfg.success_radius,
                    )
                for ep, res in enumerate(results):
                    d_raw, e_raw, dh, eh, w, t, ok = _score_row(
                        res.trajectory.states, scenes[ep], normalizer, tparams,
                        cfg.metrics_eps, cfg.success_radius,
                    )
                    rows.append(EpisodeRow(
                        episode=ep, split=split, method=method,
                        seed=rollout_seeds[ep],
                        D=d_raw, E=e_raw, d_hat=dh, e_hat=eh, w=w, T=t,
                        success=ok, steps=res.steps, decisions=res.decisions,
                    ))
            report.rows.extend(rows)
            report.aggregates[f"{split}/{method}"] = _aggregate(rows)
    return report


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".out-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: MetricReport, out_dir: str) -> tuple[str, str]:
    """Emit episodes.csv and summary.json atomically; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow([
            r.episode, r.split, r.method, r.seed,
            _fmt(r.D), _fmt(r.E), _fmt(r.d_hat), _fmt(r.e_hat),
            _fmt(r.w), _fmt(r.T), int(r.success), r.steps, r.decisions,
        ])
    csv_path = os.path.join(out_dir, "episodes.csv")
    _atomic_write(csv_path, buf.getvalue())

    json_path = os.path.join(out_dir, "summary.json")
    _atomic_write(json_path, json.dumps(report.aggregates, indent=2,
                                        sort_keys=True) + "\n")
    return csv_path, json_path
