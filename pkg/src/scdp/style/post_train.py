"""Frozen-base style post-training and ambiguity-arbitrated rollouts.

Post-training reuses the base policy's DDPM regression loop and action
normalization; the only trainable tensors are the style predictor's, reached
through the U-Net's bottleneck FiLM port. The base network and the scene
encoder are frozen and additionally hash-checked before/after, turning any
accidental update into a hard failure.
"""

from __future__ import annotations

import numpy as np

from scdp.errors import ArgumentError, IntegrityError
from scdp.nncore.layers import freeze
from scdp.observer.ellipse import EllipseConfig, detect_ambiguity
from scdp.policy.base import BasePolicy
from scdp.policy.sampling import RolloutResult, rollout_many
from scdp.policy.training import run_noise_training
from scdp.rng import Rng
from scdp.style.bundle import StyleBundle, params_sha256
from scdp.style.encode import SceneEncoder
from scdp.style.predictor import STYLES, StylePredictor
from scdp.world.scenes import A_MAX, Demo, Scene


class _PredictorPortHook:
    """Feeds per-sample (gamma, beta) from the predictor into training."""

    def __init__(self, predictor: StylePredictor, contexts: np.ndarray, dtype):
        self.predictor = predictor
        self.contexts = contexts
        self.dtype = dtype

    def begin(self, demo_indices: np.ndarray):
        gamma, beta = self.predictor.predict(self.contexts[demo_indices])
        return gamma.astype(self.dtype, copy=False), beta.astype(self.dtype, copy=False)

    def backward(self, dgamma: np.ndarray, dbeta: np.ndarray) -> None:
        self.predictor.backward(dgamma, dbeta)

    def params(self):
        return self.predictor.params()


def post_train_style(
    policy: BasePolicy,
    encoder: SceneEncoder,
    predictor: StylePredictor,
    subset: list[Demo],
    epochs: int,
    rng: Rng,
    *,
    lr: float = 3e-4,
    batch: int = 256,
    windows_per_demo: int = 16,
) -> list[float]:
    """Train one style predictor against the frozen base; returns loss curve."""
    if not subset:
        raise ArgumentError("style subset is empty")
    base_params = policy.net.params()
    enc_params = encoder.params()
    freeze(base_params)
    freeze(enc_params)
    base_before = params_sha256(base_params)
    enc_before = params_sha256(enc_params)

    contexts = np.stack(
        [encoder.encode_scene(d.trajectory.scene) for d in subset]
    ).astype(predictor.trunk[0].W.data.dtype)
    hook = _PredictorPortHook(predictor, contexts, policy.net.dtype)
    curve = run_noise_training(
        policy, subset, epochs, rng,
        lr=lr, batch=batch, windows_per_demo=windows_per_demo, port_hook=hook,
    )

    if params_sha256(base_params) != base_before:
        raise IntegrityError("base policy tensors changed during style training")
    if params_sha256(enc_params) != enc_before:
        raise IntegrityError("scene encoder tensors changed during style training")
    return curve


def predict_film(
    bundle: StyleBundle, scene: Scene, style: str
) -> tuple[np.ndarray, np.ndarray]:
    """(gamma, beta) of the requested style for a scene; pure function."""
    if style not in STYLES:
        raise ArgumentError(f"unknown style '{style}', expected one of {STYLES}")
    if bundle.encoder is None or style not in bundle.predictors:
        raise ArgumentError(f"bundle is missing the encoder or '{style}' predictor")
    c = bundle.encoder.encode_scene(scene)
    predictor = bundle.predictors[style]
    gamma, beta = predictor.predict(
        c[None, :].astype(predictor.trunk[0].W.data.dtype)
    )
    return gamma[0], beta[0]


def make_style_selector(bundle: StyleBundle, scene: Scene,
                        ellipse: EllipseConfig | None = None):
    """Per-replan arbiter: legible port when the scene looks ambiguous from
    the current state, predictable port otherwise."""
    ellipse = bundle.ellipse if ellipse is None else ellipse
    ports = {}

    def selector(sc: Scene, s_t: np.ndarray):
        ambiguous = detect_ambiguity(sc, s_t, ellipse)
        style = "legible" if ambiguous else "predictable"
        if style not in ports:
            ports[style] = predict_film(bundle, sc, style)
        gamma, beta = ports[style]
        return gamma, beta, ("L" if ambiguous else "P")

    return selector


def conditioned_rollout_many(
    bundle: StyleBundle,
    scenes: list[Scene],
    rngs: list[Rng],
    *,
    max_steps: int = 150,
    success_radius: float = 0.05,
    a_max: float = A_MAX,
) -> list[RolloutResult]:
    selectors = [make_style_selector(bundle, sc) for sc in scenes]
    return rollout_many(
        bundle.policy, scenes, rngs,
        selectors=selectors, max_steps=max_steps,
        success_radius=success_radius, a_max=a_max,
    )


def conditioned_rollout(
    bundle: StyleBundle,
    scene: Scene,
    rng: Rng,
    *,
    max_steps: int = 150,
    success_radius: float = 0.05,
    a_max: float = A_MAX,
) -> RolloutResult:
    """Ambiguity-arbitrated rollout; decisions are recorded per replan."""
    return conditioned_rollout_many(
        bundle, [scene], [rng],
        max_steps=max_steps, success_radius=success_radius, a_max=a_max,
    )[0]
