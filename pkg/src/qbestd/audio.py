"""WAV loading and standardization to the engine's canonical audio format.

Everything downstream assumes mono float audio at 16 kHz. ``load_wav``
parses RIFF/WAVE PCM (8/16/24/32-bit integer or 32-bit float) without
third-party decoders so that malformed-header, unsupported-codec and
missing-file failures stay distinguishable. ``standardize`` averages
channels to mono and resamples with a windowed-sinc polyphase filter
(Kaiser window, beta 8.6, 32 taps per phase).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np

from .errors import InputDataError

TARGET_RATE = 16_000

_RESAMPLE_TAPS = 32
_KAISER_BETA = 8.6


class MalformedWavError(InputDataError):
    """File is not a structurally valid little-endian RIFF/WAVE container."""


class UnsupportedCodecError(InputDataError):
    """Valid container, but the encoded format is not PCM int or float32."""


@dataclass
class AudioBuffer:
    """Decoded audio: samples in [-1.0, 1.0], interleaved if multichannel."""

    samples: np.ndarray
    sample_rate: int
    channel_count: int

    @property
    def frame_count(self) -> int:
        return self.samples.size // self.channel_count

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.sample_rate


def load_wav(path: str | Path) -> AudioBuffer:
    """Parse a WAV file into an AudioBuffer.

    Raises FileNotFoundError for a missing path, MalformedWavError for a
    broken container (including big-endian RIFX), and UnsupportedCodecError
    for codecs other than integer PCM or 32-bit float.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such audio file: {path}")
    raw = path.read_bytes()

    if len(raw) < 12:
        raise MalformedWavError(f"{path}: too short to hold a RIFF header")
    if raw[:4] == b"RIFX":
        raise MalformedWavError(f"{path}: big-endian RIFX container")
    if raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise MalformedWavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    offset = 12
    while offset + 8 <= len(raw):
        chunk_id = raw[offset : offset + 4]
        (size,) = struct.unpack_from("<I", raw, offset + 4)
        body_start = offset + 8
        if body_start + size > len(raw):
            raise MalformedWavError(f"{path}: chunk {chunk_id!r} truncated")
        if chunk_id == b"fmt ":
            fmt = raw[body_start : body_start + size]
        elif chunk_id == b"data":
            data = raw[body_start : body_start + size]
            break
        # chunk bodies are word-aligned; odd sizes carry a pad byte
        offset = body_start + size + (size & 1)

    if fmt is None or data is None:
        raise MalformedWavError(f"{path}: missing fmt or data chunk")
    if len(fmt) < 16:
        raise MalformedWavError(f"{path}: fmt chunk shorter than 16 bytes")

    format_tag, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if format_tag == 0xFFFE:
        # WAVE_FORMAT_EXTENSIBLE: the real codec is the leading u16 of the
        # SubFormat GUID at byte 24 of the fmt body.
        if len(fmt) < 26:
            raise MalformedWavError(f"{path}: extensible fmt chunk truncated")
        (format_tag,) = struct.unpack_from("<H", fmt, 24)
    if channels < 1:
        raise MalformedWavError(f"{path}: channel count {channels}")
    if sample_rate < 1:
        raise MalformedWavError(f"{path}: sample rate {sample_rate}")

    samples = _decode_samples(format_tag, bits, data, path)
    if samples.size % channels:
        raise MalformedWavError(f"{path}: data chunk ends mid-frame")
    return AudioBuffer(samples=samples, sample_rate=sample_rate, channel_count=channels)


def _decode_samples(format_tag: int, bits: int, data: bytes, path: Path) -> np.ndarray:
    if format_tag == 1:
        if bits == 8:
            x = np.frombuffer(data, dtype=np.uint8).astype(np.float64)
            return (x - 128.0) / 128.0
        if bits == 16:
            x = np.frombuffer(data, dtype="<i2").astype(np.float64)
            return x / 32768.0
        if bits == 24:
            if len(data) % 3:
                raise MalformedWavError(f"{path}: 24-bit payload not a multiple of 3 bytes")
            b = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3).astype(np.int64)
            x = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            x = np.where(x >= 1 << 23, x - (1 << 24), x).astype(np.float64)
            return x / float(1 << 23)
        if bits == 32:
            x = np.frombuffer(data, dtype="<i4").astype(np.float64)
            return x / float(1 << 31)
        raise UnsupportedCodecError(f"{path}: {bits}-bit integer PCM not supported")
    if format_tag == 3:
        if bits == 32:
            x = np.frombuffer(data, dtype="<f4").astype(np.float64)
            return np.clip(x, -1.0, 1.0)
        raise UnsupportedCodecError(f"{path}: {bits}-bit float PCM not supported")
    raise UnsupportedCodecError(f"{path}: WAVE format tag {format_tag} not supported")


def standardize(buf: AudioBuffer) -> AudioBuffer:
    """Return the buffer as mono 16 kHz.

    Channel mixdown is the arithmetic mean. Rate conversion is polyphase
    windowed-sinc interpolation. A buffer already in canonical form passes
    through with bitwise-identical samples, so the operation is idempotent.
    """
    if buf.samples.size == 0:
        raise InputDataError("empty audio buffer")
    mono = np.asarray(buf.samples, dtype=np.float64)
    if buf.channel_count > 1:
        mono = mono.reshape(-1, buf.channel_count).mean(axis=1)
    if buf.sample_rate != TARGET_RATE:
        mono = _resample(mono, buf.sample_rate, TARGET_RATE)
        mono = np.clip(mono, -1.0, 1.0)  # sinc overshoot must not leak out of range
    return AudioBuffer(samples=mono, sample_rate=TARGET_RATE, channel_count=1)


def _kaiser(x: np.ndarray, beta: float) -> np.ndarray:
    inside = np.abs(x) <= 1.0
    w = np.zeros_like(x)
    w[inside] = np.i0(beta * np.sqrt(1.0 - x[inside] ** 2)) / np.i0(beta)
    return w


def _phase_filters(up: int, down: int) -> np.ndarray:
    """One 32-tap windowed-sinc kernel per polyphase branch.

    Kernels are normalized to unit DC gain per phase so constant signals
    survive resampling exactly.
    """
    half = _RESAMPLE_TAPS // 2
    cutoff = min(1.0, up / down)  # relative to the input Nyquist
    offsets = np.arange(-half + 1, half + 1, dtype=np.float64)
    table = np.empty((up, _RESAMPLE_TAPS))
    for phase in range(up):
        t = offsets - phase / up
        kernel = cutoff * np.sinc(cutoff * t) * _kaiser(t / half, _KAISER_BETA)
        table[phase] = kernel / kernel.sum()
    return table


def _resample(x: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    g = gcd(rate_out, rate_in)
    up, down = rate_out // g, rate_in // g
    n_out = (x.size * up + down // 2) // down
    table = _phase_filters(up, down)
    half = _RESAMPLE_TAPS // 2

    # Output n sits at input position (n*down)/up: integer part selects the
    # window, the remainder selects the polyphase kernel.
    k = np.arange(n_out, dtype=np.int64) * down
    starts = k // up  # window covers input samples start-15 .. start+16
    phases = k % up

    padded = np.concatenate([np.zeros(half - 1), x, np.zeros(half + 1)])
    window_idx = np.arange(_RESAMPLE_TAPS, dtype=np.int64)
    out = np.empty(n_out)
    for phase in np.unique(phases):
        rows = np.nonzero(phases == phase)[0]
        windows = padded[starts[rows, None] + window_idx[None, :]]
        out[rows] = windows @ table[phase]
    return out
