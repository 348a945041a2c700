"""Temporal U-Net noise predictor with observation FiLM conditioning.

Input is a noisy action window of shape (batch, Tp, 2); output is the
predicted noise with the same shape. A conditioning vector built from the
sinusoidal diffusion-step embedding and the observation [s_t, s_{t-1}, g*]
modulates every residual block. The bottleneck feature map additionally
exposes an externally writable FiLM port (per-channel gamma/beta of the
bottleneck width); with the port at identity the network is exactly the
unconditioned base predictor.

Forward passes cache activations on the layer objects; ``backward`` must be
called right after the ``forward`` it corresponds to (single-threaded per
instance, as everywhere in this package).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scdp.errors import ArgumentError, ShapeError
from scdp.nncore.layers import (
    Conv1d,
    Dense,
    GroupNorm,
    Parameter,
    SiLU,
    SinusoidalEmbedding,
)
from scdp.rng import Rng

OBS_DIM = 6  # [s_t, s_{t-1}, g*]
ACTION_DIM = 2
STEP_EMBED_DIM = 128
COND_DIM = 256  # step features (128) + observation features (128)


@dataclass(frozen=True)
class Horizons:
    """Receding-horizon lengths: observed, predicted, executed."""

    To: int = 2
    Tp: int = 16
    Ta: int = 8

    def __post_init__(self):
        if self.To < 1:
            raise ArgumentError(f"To must be >= 1, got {self.To}")
        if self.Ta > self.Tp:
            raise ArgumentError(f"Ta ({self.Ta}) must be <= Tp ({self.Tp})")
        if self.Tp % 4 != 0:
            raise ArgumentError(
                f"Tp must be divisible by 4 (two down/up levels), got {self.Tp}"
            )


@dataclass(frozen=True)
class PolicyConfig:
    channels: tuple[int, int, int] = (64, 128, 256)
    horizons: Horizons = field(default_factory=Horizons)
    diffusion_steps: int = 100
    groups: int = 8

    def __post_init__(self):
        if len(self.channels) != 3:
            raise ArgumentError(f"need 3 channel widths, got {self.channels}")
        for c in self.channels:
            if c % self.groups != 0:
                raise ArgumentError(
                    f"channel width {c} not divisible by group count {self.groups}"
                )

    @property
    def bottleneck_width(self) -> int:
        return self.channels[2]


class ResBlock1D:
    """conv -> norm -> conditioned scale/shift -> SiLU -> conv -> norm -> SiLU,
    plus a (1x1-projected) residual connection."""

    def __init__(self, c_in, c_out, *, groups, rng, name, dtype):
        self.c_out = c_out
        self.conv1 = Conv1d(c_in, c_out, 3, rng=rng, name=f"{name}.conv1", dtype=dtype)
        self.gn1 = GroupNorm(c_out, groups=groups, name=f"{name}.gn1", dtype=dtype)
        self.cond = Dense(COND_DIM, 2 * c_out, rng=rng, name=f"{name}.cond", dtype=dtype)
        self.act1 = SiLU()
        self.conv2 = Conv1d(c_out, c_out, 3, rng=rng, name=f"{name}.conv2", dtype=dtype)
        self.gn2 = GroupNorm(c_out, groups=groups, name=f"{name}.gn2", dtype=dtype)
        self.act2 = SiLU()
        self.skip = (
            None
            if c_in == c_out
            else Conv1d(c_in, c_out, 1, rng=rng, name=f"{name}.skip", dtype=dtype)
        )
        self._scale = None
        self._h_norm = None

    def params(self) -> list[Parameter]:
        out = self.conv1.params() + self.gn1.params() + self.cond.params()
        out += self.conv2.params() + self.gn2.params()
        if self.skip is not None:
            out += self.skip.params()
        return out

    def forward(self, x: np.ndarray, cond: np.ndarray) -> np.ndarray:
        h = self.gn1.forward(self.conv1.forward(x))
        sb = self.cond.forward(cond)
        scale = sb[:, : self.c_out]
        shift = sb[:, self.c_out :]
        self._scale = scale
        self._h_norm = h
        # scale is a residual around identity so a fresh block starts neutral
        h = h * (1.0 + scale)[:, :, None] + shift[:, :, None]
        h = self.act1.forward(h)
        h = self.act2.forward(self.gn2.forward(self.conv2.forward(h)))
        res = x if self.skip is None else self.skip.forward(x)
        return h + res

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Returns (dx, dcond)."""
        gh = self.conv2.backward(self.gn2.backward(self.act2.backward(grad)))
        gh = self.act1.backward(gh)
        dscale = (gh * self._h_norm).sum(axis=2)
        dshift = gh.sum(axis=2)
        dcond = self.cond.backward(np.concatenate([dscale, dshift], axis=1))
        gh = gh * (1.0 + self._scale)[:, :, None]
        dx = self.conv1.backward(self.gn1.backward(gh))
        dx += grad if self.skip is None else self.skip.backward(grad)
        return dx, dcond


def _upsample_nearest2(x: np.ndarray) -> np.ndarray:
    return np.repeat(x, 2, axis=2)


def _upsample_nearest2_backward(grad: np.ndarray) -> np.ndarray:
    b, c, t2 = grad.shape
    return grad.reshape(b, c, t2 // 2, 2).sum(axis=3)


class PolicyNet:
    """U-Net epsilon predictor over action windows with a bottleneck FiLM port."""

    def __init__(self, config: PolicyConfig, rng: Rng, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        c1, c2, c3 = config.channels
        g = config.groups

        self.step_embed = SinusoidalEmbedding(STEP_EMBED_DIM, dtype=dtype)
        self.k_fc1 = Dense(STEP_EMBED_DIM, 128, rng=rng, name="cond.k1", dtype=dtype)
        self.k_act = SiLU()
        self.k_fc2 = Dense(128, 128, rng=rng, name="cond.k2", dtype=dtype)
        self.obs_fc1 = Dense(OBS_DIM, 128, rng=rng, name="cond.obs1", dtype=dtype)
        self.obs_act = SiLU()
        self.obs_fc2 = Dense(128, 128, rng=rng, name="cond.obs2", dtype=dtype)

        def rb(ci, co, name):
            return ResBlock1D(ci, co, groups=g, rng=rng, name=name, dtype=dtype)

        self.enc1a = rb(ACTION_DIM, c1, "enc1a")
        self.enc1b = rb(c1, c1, "enc1b")
        self.down1 = Conv1d(c1, c1, 3, stride=2, rng=rng, name="down1", dtype=dtype)
        self.enc2a = rb(c1, c2, "enc2a")
        self.enc2b = rb(c2, c2, "enc2b")
        self.down2 = Conv1d(c2, c2, 3, stride=2, rng=rng, name="down2", dtype=dtype)
        self.mid1 = rb(c2, c3, "mid1")
        self.mid2 = rb(c3, c3, "mid2")
        self.upconv2 = Conv1d(c3, c2, 3, rng=rng, name="upconv2", dtype=dtype)
        self.dec2a = rb(2 * c2, c2, "dec2a")
        self.dec2b = rb(c2, c2, "dec2b")
        self.upconv1 = Conv1d(c2, c1, 3, rng=rng, name="upconv1", dtype=dtype)
        self.dec1a = rb(2 * c1, c1, "dec1a")
        self.dec1b = rb(c1, c1, "dec1b")
        self.head_gn = GroupNorm(c1, groups=g, name="head.gn", dtype=dtype)
        self.head_act = SiLU()
        # zero-init output so an untrained net predicts zero noise
        self.head_conv = Conv1d(
            c1, ACTION_DIM, 1, rng=rng, name="head.conv", dtype=dtype, zero_init=True
        )

        self._blocks = [
            self.enc1a, self.enc1b, self.enc2a, self.enc2b,
            self.mid1, self.mid2, self.dec2a, self.dec2b, self.dec1a, self.dec1b,
        ]
        self._port = None
        self._mid_pre_port = None
        self.port_grads: tuple[np.ndarray, np.ndarray] | None = None

    def params(self) -> list[Parameter]:
        out = (
            self.k_fc1.params() + self.k_fc2.params()
            + self.obs_fc1.params() + self.obs_fc2.params()
        )
        for blk in self._blocks:
            out += blk.params()
        out += self.down1.params() + self.down2.params()
        out += self.upconv2.params() + self.upconv1.params()
        out += self.head_gn.params() + self.head_conv.params()
        return out

    def named_params(self) -> dict[str, Parameter]:
        return {p.name: p for p in self.params()}

    def forward(
        self,
        noisy_actions: np.ndarray,
        k: np.ndarray,
        obs: np.ndarray,
        port: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> np.ndarray:
        """Predict the injected noise; output shape equals input shape.

        ``noisy_actions``: (B, Tp, 2); ``k``: (B,) integer steps; ``obs``:
        (B, 6); ``port``: optional (gamma, beta) with shape (B, bottleneck)
        applied to the mid feature map per channel.
        """
        tp = self.config.horizons.Tp
        if noisy_actions.ndim != 3 or noisy_actions.shape[1:] != (tp, ACTION_DIM):
            raise ShapeError(
                f"noisy actions have shape {noisy_actions.shape}, expected "
                f"(B, {tp}, {ACTION_DIM})"
            )
        if obs.ndim != 2 or obs.shape[1] != OBS_DIM:
            raise ShapeError(f"obs has shape {obs.shape}, expected (B, {OBS_DIM})")
        x = noisy_actions.astype(self.dtype, copy=False).transpose(0, 2, 1)
        obs = obs.astype(self.dtype, copy=False)

        k_feat = self.k_fc2.forward(self.k_act.forward(self.k_fc1.forward(
            self.step_embed.forward(k))))
        o_feat = self.obs_fc2.forward(self.obs_act.forward(self.obs_fc1.forward(obs)))
        cond = np.concatenate([k_feat, o_feat], axis=1)

        h1 = self.enc1b.forward(self.enc1a.forward(x, cond), cond)
        h2 = self.enc2b.forward(self.enc2a.forward(self.down1.forward(h1), cond), cond)
        m = self.mid1.forward(self.down2.forward(h2), cond)

        self._port = port
        if port is not None:
            gamma, beta = port
            if gamma.shape != (x.shape[0], m.shape[1]) or beta.shape != gamma.shape:
                raise ShapeError(
                    f"film port shapes {gamma.shape}/{beta.shape} do not match "
                    f"(batch, bottleneck) = ({x.shape[0]}, {m.shape[1]})"
                )
            self._mid_pre_port = m
            m = m * gamma[:, :, None] + beta[:, :, None]
        m = self.mid2.forward(m, cond)

        u2 = self.upconv2.forward(_upsample_nearest2(m))
        d2 = self.dec2b.forward(
            self.dec2a.forward(np.concatenate([u2, h2], axis=1), cond), cond
        )
        u1 = self.upconv1.forward(_upsample_nearest2(d2))
        d1 = self.dec1b.forward(
            self.dec1a.forward(np.concatenate([u1, h1], axis=1), cond), cond
        )
        out = self.head_conv.forward(self.head_act.forward(self.head_gn.forward(d1)))
        return out.transpose(0, 2, 1)

    def backward(self, grad: np.ndarray) -> None:
        """Accumulate parameter gradients; sets ``port_grads`` if a port was
        active during the corresponding forward."""
        c1 = self.config.channels[0]
        c2 = self.config.channels[1]
        g = grad.astype(self.dtype, copy=False).transpose(0, 2, 1)

        g = self.head_gn.backward(self.head_act.backward(self.head_conv.backward(g)))
        g, dcond = self.dec1b.backward(g)
        g, dc = self.dec1a.backward(g)
        dcond += dc
        du1 = g[:, :c1]
        dh1_skip = g[:, c1:]
        g = _upsample_nearest2_backward(self.upconv1.backward(du1))
        g, dc = self.dec2b.backward(g)
        dcond += dc
        g, dc = self.dec2a.backward(g)
        dcond += dc
        du2 = g[:, :c2]
        dh2_skip = g[:, c2:]
        g = _upsample_nearest2_backward(self.upconv2.backward(du2))
        g, dc = self.mid2.backward(g)
        dcond += dc
        if self._port is not None:
            gamma, _ = self._port
            self.port_grads = (
                (g * self._mid_pre_port).sum(axis=2),
                g.sum(axis=2),
            )
            g = g * gamma[:, :, None]
        else:
            self.port_grads = None
        g, dc = self.mid1.backward(g)
        dcond += dc
        g = self.down2.backward(g)
        g += dh2_skip
        g, dc = self.enc2b.backward(g)
        dcond += dc
        g, dc = self.enc2a.backward(g)
        dcond += dc
        g = self.down1.backward(g)
        g += dh1_skip
        g, dc = self.enc1b.backward(g)
        dcond += dc
        g, dc = self.enc1a.backward(g)
        dcond += dc

        dk = dcond[:, :128]
        dobs = dcond[:, 128:]
        self.k_fc1.backward(self.k_act.backward(self.k_fc2.backward(dk)))
        self.obs_fc1.backward(self.obs_act.backward(self.obs_fc2.backward(dobs)))
