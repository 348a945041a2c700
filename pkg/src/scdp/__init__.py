"""Style-conditioned trajectory diffusion lab.

Subpackages:
    nncore   -- minimal differentiable-computation core (layers, Adam,
                gradient verification, binary checkpoints)
    world    -- scene sampling, Bezier demonstrations, dataset persistence
    observer -- Bayesian goal inference, legibility, ambiguity detection
    policy   -- DDPM noise schedule, temporal U-Net, training and rollout
    style    -- scene encoder, style predictors, frozen-base post-training
    evalcli  -- metrics, normalization, evaluation harness, command line
"""

__version__ = "0.1.0"
