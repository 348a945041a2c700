"""Portable pseudo-random generator used everywhere in the package.

Why not ``numpy.random``: dataset files, checkpoints and evaluation CSVs are
required to be bit-reproducible from a seed, so the generator is pinned down
to the bit level here instead of relying on numpy's stream stability.

Definition (fixed, do not change without bumping dataset/checkpoint versions):

* 64-bit words come from ``LANES`` = 1024 interleaved xoshiro256** streams.
  Lane ``i`` owns positions ``i, i+LANES, i+2*LANES, ...`` of the word
  stream. Each lane's 256-bit state is seeded from consecutive outputs of a
  single splitmix64 run over the user seed (lane 0 takes outputs 0..3,
  lane 1 outputs 4..7, ...), the initialisation recommended by the xoshiro
  authors.
* The word stream is consumed strictly in order regardless of call
  granularity: two ``uniform(4)`` calls read the same 8 words as one
  ``uniform(8)``.
* ``uniform`` maps a word w to ``(w >> 11) * 2**-53`` in [0, 1).
* ``normal`` uses Box-Muller on word pairs: ``u1 = ((w0 >> 11) + 1) * 2**-53``
  in (0, 1], ``u2 = (w1 >> 11) * 2**-53``; the pair yields
  ``r*cos(2*pi*u2), r*sin(2*pi*u2)`` with ``r = sqrt(-2*ln(u1))``. A draw of
  odd length consumes a full final pair and discards the sine member.

The integer word stream is exactly reproducible on any platform; the float
transforms are deterministic for a given libm.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64
_MASK = _U64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)

LANES = 1024


def _splitmix64(values: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer; input is ``seed + k*GOLDEN`` for output index k."""
    with np.errstate(over="ignore"):
        z = values.astype(_U64)
        z = (z ^ (z >> _U64(30))) * _MIX1
        z = (z ^ (z >> _U64(27))) * _MIX2
        return z ^ (z >> _U64(31))


def derive_seed(seed: int, *indices: int) -> int:
    """Deterministically derive a child seed from a parent seed and indices."""
    s = _U64(seed & 0xFFFFFFFFFFFFFFFF)
    for ix in indices:
        with np.errstate(over="ignore"):
            bump = s + _GOLDEN * _U64((ix + 1) & 0xFFFFFFFFFFFFFFFF)
        s = _splitmix64(np.asarray(bump))
    return int(s)


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << _U64(k)) | (x >> _U64(64 - k))


class Rng:
    """Seeded xoshiro256** stream with buffered word consumption."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        ks = np.arange(1, 4 * LANES + 1, dtype=_U64)
        words = _splitmix64(_U64(self.seed & 0xFFFFFFFFFFFFFFFF) + ks * _GOLDEN)
        state = words.reshape(LANES, 4)
        self._s0 = state[:, 0].copy()
        self._s1 = state[:, 1].copy()
        self._s2 = state[:, 2].copy()
        self._s3 = state[:, 3].copy()
        self._buffer = np.empty(0, dtype=_U64)

    def _next_block(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
            out = _rotl(s1 * _U64(5), 7) * _U64(9)
            t = s1 << _U64(17)
            s2 = s2 ^ s0
            s3 = s3 ^ s1
            s1 = s1 ^ s2
            s0 = s0 ^ s3
            s2 = s2 ^ t
            s3 = _rotl(s3, 45)
            self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
            return out

    def words(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words of the stream."""
        if n < 0:
            raise ValueError(f"word count must be >= 0, got {n}")
        buf = self._buffer
        if buf.size >= n:
            self._buffer = buf[n:]
            return buf[:n]
        blocks = -(-(n - buf.size) // LANES)
        flat = np.empty(buf.size + blocks * LANES, dtype=_U64)
        flat[: buf.size] = buf
        pos = buf.size
        for _ in range(blocks):
            flat[pos : pos + LANES] = self._next_block()
            pos += LANES
        self._buffer = flat[n:]
        return flat[:n]

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.words(n) >> _U64(11)).astype(np.float64) * 2.0 ** -53
        if low == 0.0 and high == 1.0:
            return u
        return low + u * (high - low)

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        w = self.words(2 * pairs)
        u1 = ((w[0::2] >> _U64(11)).astype(np.float64) + 1.0) * 2.0 ** -53
        u2 = (w[1::2] >> _U64(11)).astype(np.float64) * 2.0 ** -53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * np.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def normal_shaped(self, shape: tuple[int, ...], dtype=np.float64) -> np.ndarray:
        flat = self.normal(int(np.prod(shape)) if shape else 1)
        return flat[: int(np.prod(shape))].reshape(shape).astype(dtype, copy=False)

    def integers(self, n: int, low: int, high: int) -> np.ndarray:
        """``n`` integers uniform over [low, high). Range must fit in 2**53."""
        span = high - low
        if span <= 0:
            raise ValueError(f"empty integer range [{low}, {high})")
        u = self.uniform(n)
        return low + np.floor(u * span).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Permutation of range(n) by stable argsort of fresh uniforms."""
        keys = self.uniform(n)
        return np.argsort(keys, kind="stable")

    def spawn(self, index: int) -> "Rng":
        return Rng(derive_seed(self.seed, index))
