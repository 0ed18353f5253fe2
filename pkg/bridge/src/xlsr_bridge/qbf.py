"""QBF1 writer.

Byte layout, little-endian throughout: 4-byte ASCII magic "QBF1",
u32 n_frames, u32 dim, f64 frame_hop_s, f64 frame_offset_s, then
n_frames*dim float32 values row-major (frame-major). This is the only
surface shared with the detection engine, so it is written by hand
here rather than imported from it.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError

MAGIC = b"QBF1"
_HEADER = struct.Struct("<4sIIdd")


def write_qbf(path: str | Path, data: np.ndarray,
              frame_hop_s: float, frame_offset_s: float) -> None:
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 2 or data.size == 0:
        raise InvalidConfigError(
            f"feature matrix must be non-empty and 2-D, got shape {data.shape}")
    if not np.isfinite(data).all():
        raise InvalidConfigError("feature matrix contains non-finite values")
    n_frames, dim = data.shape
    header = _HEADER.pack(MAGIC, n_frames, dim, frame_hop_s, frame_offset_s)
    Path(path).write_bytes(header + data.tobytes())
