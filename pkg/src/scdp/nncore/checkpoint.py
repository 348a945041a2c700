"""Binary checkpoint format for named tensors.

Layout (all integers little-endian):
    magic "SCDP" | u32 version (=1) | u32 tensor count
    per tensor: u16 name length, UTF-8 name, u8 dtype tag (0=f32, 1=f64),
                u8 ndim, u32 dims[ndim], raw little-endian payload.
Files are written atomically (temp file + rename) so a crashed writer never
leaves a half-written checkpoint behind.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from scdp.errors import (
    ArgumentError,
    CheckpointError,
    CheckpointMagicError,
    CheckpointTruncatedError,
    CheckpointVersionError,
)

MAGIC = b"SCDP"
VERSION = 1

_DTYPE_TAGS = {np.dtype("<f4"): 0, np.dtype("<f8"): 1}
_TAG_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def checkpoint_save(tensors: dict[str, np.ndarray], path: str) -> None:
    """Write named tensors; names must be unique (dict keys already are)."""
    chunks = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        dt = arr.dtype.newbyteorder("<")
        if dt not in _DTYPE_TAGS:
            raise ArgumentError(f"tensor '{name}' has unsupported dtype {arr.dtype}")
        nb = name.encode("utf-8")
        if len(nb) > 0xFFFF:
            raise ArgumentError(f"tensor name too long ({len(nb)} bytes)")
        chunks.append(struct.pack("<H", len(nb)))
        chunks.append(nb)
        chunks.append(struct.pack("<BB", _DTYPE_TAGS[dt], arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(np.ascontiguousarray(arr, dtype=dt).tobytes())
    blob = b"".join(chunks)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".ckpt-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise CheckpointTruncatedError(
                f"checkpoint truncated: needed {n} bytes at offset {self.pos}, "
                f"file has {len(self.blob)}"
            )
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out


def checkpoint_load(path: str) -> dict[str, np.ndarray]:
    """Read a checkpoint back; inverse of checkpoint_save, bit-exact."""
    with open(path, "rb") as f:
        blob = f.read()
    r = _Reader(blob)
    if r.take(4) != MAGIC:
        raise CheckpointMagicError(f"'{path}' is not a checkpoint (bad magic)")
    version, count = struct.unpack("<II", r.take(8))
    if version != VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint version {version} (expected {VERSION})"
        )
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", r.take(2))
        name = r.take(name_len).decode("utf-8")
        tag, ndim = struct.unpack("<BB", r.take(2))
        if tag not in _TAG_DTYPES:
            raise CheckpointError(f"tensor '{name}' has unknown dtype tag {tag}")
        dims = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
        dt = _TAG_DTYPES[tag]
        n_items = 1
        for d in dims:
            n_items *= d
        payload = r.take(n_items * dt.itemsize)
        if name in out:
            raise CheckpointError(f"duplicate tensor name '{name}'")
        out[name] = np.frombuffer(payload, dtype=dt).reshape(dims).copy()
    return out
