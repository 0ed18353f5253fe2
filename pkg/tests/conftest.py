"""Shared test fixtures: hand-built WAV bytes and synthetic feature corpora.

The WAV builder is intentionally independent of qbestd.audio so the parser
is exercised against a second implementation of the container format.
"""

from __future__ import annotations

import struct

import numpy as np
import pytest

from qbestd.features import FeatureMatrix


def wav_bytes(payload: bytes, sample_rate: int, bits: int, channels: int = 1,
              format_tag: int = 1) -> bytes:
    block_align = channels * bits // 8
    fmt = struct.pack("<HHIIHH", format_tag, channels, sample_rate,
                      sample_rate * block_align, block_align, bits)
    body = b"WAVE"
    body += b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


def pcm16_payload(samples: np.ndarray) -> bytes:
    return np.asarray(samples, dtype="<i2").tobytes()


def write_wav_i16(path, samples: np.ndarray, sample_rate: int, channels: int = 1):
    q = np.clip(np.rint(np.asarray(samples) * 32767.0), -32768, 32767)
    path.write_bytes(wav_bytes(pcm16_payload(q.astype(np.int64)), sample_rate, 16, channels))


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def feature_matrix(data: np.ndarray, hop: float = 0.010, offset: float = 0.0125,
                   source: str = "test") -> FeatureMatrix:
    return FeatureMatrix(data=np.ascontiguousarray(data, dtype=np.float32),
                         frame_hop_s=hop, frame_offset_s=offset, source=source)


def planted_pair(rng, n: int = 80, m: int = 500, dim: int = 39,
                 offsets: tuple[int, ...] = (120,)) -> tuple[FeatureMatrix, FeatureMatrix]:
    """A random query and a random reference with exact copies planted."""
    query = rng.standard_normal((n, dim))
    ref = rng.standard_normal((m, dim))
    for off in offsets:
        ref[off : off + n] = query
    return feature_matrix(query), feature_matrix(ref)
