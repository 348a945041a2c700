"""Scene encoding, style predictors, and frozen-base post-training."""

from scdp.style.encode import (
    SceneEncoder,
    enrich_scene,
    load_encoder,
    save_encoder,
    train_encoder,
)
from scdp.style.predictor import StylePredictor, load_predictor, save_predictor
from scdp.style.bundle import StyleBundle, load_bundle
from scdp.style.post_train import conditioned_rollout, post_train_style, predict_film

__all__ = [
    "SceneEncoder",
    "enrich_scene",
    "train_encoder",
    "save_encoder",
    "load_encoder",
    "StylePredictor",
    "save_predictor",
    "load_predictor",
    "StyleBundle",
    "load_bundle",
    "post_train_style",
    "predict_film",
    "conditioned_rollout",
]
