"""Goal-conditioned DDPM policy: schedule, temporal U-Net, training, rollout."""

from scdp.policy.schedule import NoiseSchedule, forward_noise, make_schedule
from scdp.policy.unet import Horizons, PolicyConfig, PolicyNet
from scdp.policy.base import BasePolicy, load_policy, save_policy
from scdp.policy.training import train_base
from scdp.policy.sampling import RolloutResult, rollout, rollout_many, sample_actions

__all__ = [
    "NoiseSchedule",
    "forward_noise",
    "make_schedule",
    "Horizons",
    "PolicyConfig",
    "PolicyNet",
    "BasePolicy",
    "load_policy",
    "save_policy",
    "train_base",
    "RolloutResult",
    "rollout",
    "rollout_many",
    "sample_actions",
]
