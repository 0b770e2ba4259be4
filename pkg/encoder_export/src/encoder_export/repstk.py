"""Writer for the REPSTK1 layer-stack container.

Layout: 8-byte magic "REPSTK1\\0", then little-endian u32 layers, u32
features, u32 time steps, f32 frame rate, 8 reserved zero bytes (32-byte
header total), then float32 values in C order, so value (l, f, t) sits at
byte offset 32 + 4*((l*F + f)*T + t).
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ExportError

MAGIC = b"REPSTK1\x00"
_HEADER = struct.Struct("<8sIIIf8x")


def write_repstk(data: np.ndarray, frame_rate: float, path: str | Path) -> None:
    """Write a (layers, features, time) float32 array atomically."""
    data = np.asarray(data)
    if data.ndim != 3 or min(data.shape) < 1:
        raise ExportError(f"stack must be 3-d with positive dims, got shape {data.shape}")
    if not np.isfinite(data).all():
        raise ExportError("stack contains non-finite values")
    if not frame_rate > 0:
        raise ExportError(f"frame_rate must be positive, got {frame_rate}")
    payload = np.ascontiguousarray(data, dtype="<f4")
    header = _HEADER.pack(MAGIC, *data.shape, frame_rate)

    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload.tobytes())
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
