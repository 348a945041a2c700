"""Minimal differentiable-computation core.

Fixed-architecture building blocks (dense, 1D convolution, group norm, SiLU,
FiLM modulation) with hand-written backward passes, an Adam optimizer with
freeze support, central finite-difference gradient verification, and a
binary checkpoint format.
"""

from scdp.nncore.layers import (
    Parameter,
    Dense,
    Conv1d,
    GroupNorm,
    SiLU,
    SinusoidalEmbedding,
    affine_forward,
    conv1d_forward,
    film_modulate,
    film_backward,
    freeze,
    unfreeze,
)
from scdp.nncore.optim import AdamState, adam_step
from scdp.nncore.gradcheck import GradCheckReport, gradient_check
from scdp.nncore.checkpoint import checkpoint_save, checkpoint_load

__all__ = [
    "Parameter",
    "Dense",
    "Conv1d",
    "GroupNorm",
    "SiLU",
    "SinusoidalEmbedding",
    "affine_forward",
    "conv1d_forward",
    "film_modulate",
    "film_backward",
    "freeze",
    "unfreeze",
    "AdamState",
    "adam_step",
    "GradCheckReport",
    "gradient_check",
    "checkpoint_save",
    "checkpoint_load",
]
