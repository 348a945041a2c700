"""Layers with explicit forward/backward passes.

Every layer caches what its backward pass needs during forward; a layer
instance therefore supports one in-flight forward at a time (the package's
concurrency contract: one model instance per thread during a training step).
Default dtype is float32; gradient-verification runs construct float64
layers.
"""

from __future__ import annotations

import math

import numpy as np

from scdp.errors import ShapeError
from scdp.rng import Rng


class Parameter:
    """Named tensor with a matching gradient accumulator and a freeze flag."""

    __slots__ = ("name", "data", "grad", "frozen")

    def __init__(self, name: str, data: np.ndarray):
        self.name = name
        self.data = data
        self.grad = np.zeros_like(data)
        self.frozen = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0


def freeze(params: list[Parameter]) -> None:
    for p in params:
        p.frozen = True


def unfreeze(params: list[Parameter]) -> None:
    for p in params:
        p.frozen = False


class Dense:
    """Affine map y = x W + b over the last axis."""

    def __init__(
        self,
        n_in: int,
        n_out: int,
        *,
        rng: Rng,
        name: str = "dense",
        dtype=np.float32,
        zero_init: bool = False,
    ):
        self.n_in = n_in
        self.n_out = n_out
        if zero_init:
            w = np.zeros((n_in, n_out))
        else:
            w = rng.normal_shaped((n_in, n_out)) / math.sqrt(n_in)
        self.W = Parameter(f"{name}.W", w.astype(dtype))
        self.b = Parameter(f"{name}.b", np.zeros(n_out, dtype=dtype))
        self._x = None

    def params(self) -> list[Parameter]:
        return [self.W, self.b]

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.n_in:
            raise ShapeError(
                f"dense input has shape {x.shape}, weight expects last axis "
                f"{self.W.data.shape[0]} (weight shape {self.W.data.shape})"
            )
        self._x = x
        return x @ self.W.data + self.b.data

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x = self._x
        xf = x.reshape(-1, self.n_in)
        gf = grad.reshape(-1, self.n_out)
        self.W.grad += xf.T @ gf
        self.b.grad += gf.sum(axis=0)
        return (gf @ self.W.data.T).reshape(x.shape)


class Conv1d:
    """Same-padded 1D convolution over (batch, channels, time); odd kernel."""

    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int = 3,
        *,
        stride: int = 1,
        rng: Rng,
        name: str = "conv",
        dtype=np.float32,
        zero_init: bool = False,
    ):
        if kernel % 2 != 1:
            raise ShapeError(f"kernel width must be odd, got {kernel}")
        self.c_in = c_in
        self.c_out = c_out
        self.kernel = kernel
        self.stride = stride
        self.pad = kernel // 2
        if zero_init:
            w = np.zeros((c_out, c_in, kernel))
        else:
            w = rng.normal_shaped((c_out, c_in, kernel)) / math.sqrt(c_in * kernel)
        self.W = Parameter(f"{name}.W", w.astype(dtype))
        self.b = Parameter(f"{name}.b", np.zeros(c_out, dtype=dtype))
        self._cols = None
        self._x_shape = None

    def params(self) -> list[Parameter]:
        return [self.W, self.b]

    def out_len(self, t: int) -> int:
        return (t + 2 * self.pad - self.kernel) // self.stride + 1

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 3 or x.shape[1] != self.c_in:
            raise ShapeError(
                f"conv input has shape {x.shape}, weight expects "
                f"(batch, {self.c_in}, time) (weight shape {self.W.data.shape})"
            )
        b, _, t = x.shape
        t_out = self.out_len(t)
        xpad = np.pad(x, ((0, 0), (0, 0), (self.pad, self.pad)))
        taps = [
            xpad[:, :, dk : dk + self.stride * (t_out - 1) + 1 : self.stride]
            for dk in range(self.kernel)
        ]
        cols = np.stack(taps, axis=3)  # (B, Cin, Tout, K)
        cols2 = cols.transpose(0, 2, 1, 3).reshape(b * t_out, self.c_in * self.kernel)
        wmat = self.W.data.reshape(self.c_out, -1)
        y = cols2 @ wmat.T + self.b.data
        self._cols = cols2
        self._x_shape = x.shape
        return y.reshape(b, t_out, self.c_out).transpose(0, 2, 1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        b, _, t = self._x_shape
        t_out = grad.shape[2]
        g2 = grad.transpose(0, 2, 1).reshape(b * t_out, self.c_out)
        self.W.grad += (g2.T @ self._cols).reshape(self.W.data.shape)
        self.b.grad += g2.sum(axis=0)
        wmat = self.W.data.reshape(self.c_out, -1)
        dcols = (g2 @ wmat).reshape(b, t_out, self.c_in, self.kernel)
        dcols = dcols.transpose(0, 2, 1, 3)  # (B, Cin, Tout, K)
        dxpad = np.zeros((b, self.c_in, t + 2 * self.pad), dtype=grad.dtype)
        for dk in range(self.kernel):
            dxpad[:, :, dk : dk + self.stride * (t_out - 1) + 1 : self.stride] += dcols[
                :, :, :, dk
            ]
        return dxpad[:, :, self.pad : self.pad + t]


class GroupNorm:
    """Group normalization over (batch, channels, time) with per-channel affine."""

    def __init__(
        self,
        channels: int,
        *,
        groups: int = 8,
        eps: float = 1e-5,
        name: str = "gn",
        dtype=np.float32,
    ):
        if channels % groups != 0:
            raise ShapeError(f"channels {channels} not divisible by groups {groups}")
        self.channels = channels
        self.groups = groups
        self.eps = eps
        self.gamma = Parameter(f"{name}.gamma", np.ones(channels, dtype=dtype))
        self.beta = Parameter(f"{name}.beta", np.zeros(channels, dtype=dtype))
        self._cache = None

    def params(self) -> list[Parameter]:
        return [self.gamma, self.beta]

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 3 or x.shape[1] != self.channels:
            raise ShapeError(
                f"group norm input has shape {x.shape}, expects "
                f"(batch, {self.channels}, time)"
            )
        b, c, t = x.shape
        g = self.groups
        xg = x.reshape(b, g, (c // g) * t)
        mean = xg.mean(axis=2, keepdims=True)
        var = xg.var(axis=2, keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = ((xg - mean) * inv).reshape(b, c, t)
        self._cache = (xhat, inv)
        return xhat * self.gamma.data[:, None] + self.beta.data[:, None]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        xhat, inv = self._cache
        b, c, t = grad.shape
        g = self.groups
        self.gamma.grad += (grad * xhat).sum(axis=(0, 2))
        self.beta.grad += grad.sum(axis=(0, 2))
        dxhat = (grad * self.gamma.data[:, None]).reshape(b, g, (c // g) * t)
        xh = xhat.reshape(b, g, (c // g) * t)
        n = xh.shape[2]
        dsum = dxhat.sum(axis=2, keepdims=True)
        dxsum = (dxhat * xh).sum(axis=2, keepdims=True)
        dx = (dxhat - dsum / n - xh * dxsum / n) * inv
        return dx.reshape(b, c, t)


class SiLU:
    """x * sigmoid(x), the activation used throughout the networks here."""

    def __init__(self):
        self._cache = None

    def params(self) -> list[Parameter]:
        return []

    def forward(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):  # exp overflow saturates to sig = 0
            sig = 1.0 / (1.0 + np.exp(-x))
        self._cache = (x, sig)
        return x * sig

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x, sig = self._cache
        return grad * (sig * (1.0 + x * (1.0 - sig)))


class SinusoidalEmbedding:
    """Fixed sin/cos embedding of integer diffusion-step indices."""

    def __init__(self, dim: int, dtype=np.float32):
        if dim % 2 != 0:
            raise ShapeError(f"embedding dim must be even, got {dim}")
        half = dim // 2
        self.dim = dim
        self.freqs = np.exp(-math.log(10000.0) * np.arange(half) / (half - 1)).astype(
            dtype
        )

    def forward(self, k: np.ndarray) -> np.ndarray:
        arg = np.asarray(k, dtype=self.freqs.dtype)[:, None] * self.freqs[None, :]
        return np.concatenate([np.sin(arg), np.cos(arg)], axis=1)


def affine_forward(layer: Dense, x: np.ndarray) -> np.ndarray:
    """Functional alias: run a dense layer forward."""
    return layer.forward(x)


def conv1d_forward(layer: Conv1d, x: np.ndarray) -> np.ndarray:
    """Functional alias: run a conv layer forward."""
    return layer.forward(x)


def _film_expand(vec: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Broadcast a per-channel vector against h's channel axis."""
    if vec.shape == h.shape:
        return vec
    if h.ndim == 3 and vec.ndim == 2 and vec.shape == h.shape[:2]:
        return vec[:, :, None]
    if h.ndim == 3 and vec.ndim == 1 and vec.shape[0] == h.shape[1]:
        return vec[None, :, None]
    if h.ndim == 2 and vec.ndim == 1 and vec.shape[0] == h.shape[1]:
        return vec[None, :]
    raise ShapeError(
        f"film vector of shape {vec.shape} does not broadcast over the channel "
        f"axis of features with shape {h.shape}"
    )


def film_modulate(h: np.ndarray, gamma: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Per-channel affine modulation gamma * h + beta.

    ``gamma``/``beta`` may equal h's shape, be (channels,), or be
    (batch, channels) against h of shape (batch, channels, time).
    """
    return h * _film_expand(gamma, h) + _film_expand(beta, h)


def film_backward(
    grad: np.ndarray, h: np.ndarray, gamma: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of film_modulate w.r.t. (h, gamma, beta)."""
    dh = grad * _film_expand(gamma, h)
    gh = grad * h
    if gamma.shape == h.shape:
        dgamma = gh
        dbeta = grad.copy()
    elif h.ndim == 3 and gamma.ndim == 2:
        dgamma = gh.sum(axis=2)
        dbeta = grad.sum(axis=2)
    elif h.ndim == 3 and gamma.ndim == 1:
        dgamma = gh.sum(axis=(0, 2))
        dbeta = grad.sum(axis=(0, 2))
    elif h.ndim == 2 and gamma.ndim == 1:
        dgamma = gh.sum(axis=0)
        dbeta = grad.sum(axis=0)
    else:  # unreachable if forward succeeded
        raise ShapeError(f"film backward shapes {gamma.shape} vs {h.shape}")
    return dh, dgamma, dbeta
