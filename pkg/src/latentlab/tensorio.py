"""LLT1 dense tensor exchange format.

Layout: magic bytes ``LLT1``, uint32 ndim, ndim x uint32 dims, then a
row-major little-endian float32 payload. Used for heatmaps, feature grids,
offsets, masks and index tensors (indices are stored as float32 holding
integer values).
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import TensorFormatError

MAGIC = b"LLT1"


def write_tensor(path, array) -> None:
    """Write ``array`` to ``path`` as an LLT1 file (atomically)."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    header = MAGIC + struct.pack("<I", arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())
    os.replace(tmp, path)


def read_tensor(path) -> np.ndarray:
    """Read an LLT1 file back into a float32 ndarray."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise TensorFormatError(f"{path}: bad magic {blob[:4]!r}")
    if len(blob) < 8:
        raise TensorFormatError(f"{path}: truncated header")
    (ndim,) = struct.unpack_from("<I", blob, 4)
    dims_end = 8 + 4 * ndim
    if len(blob) < dims_end:
        raise TensorFormatError(f"{path}: truncated dims")
    dims = struct.unpack_from(f"<{ndim}I", blob, 8)
    expected = int(np.prod(dims, dtype=np.int64)) * 4
    payload = blob[dims_end:]
    if len(payload) != expected:
        raise TensorFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
