"""WAV loading for the exporter: any PCM wav in, 16 kHz mono float out."""

from __future__ import annotations

import math
import wave
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import UnreadableAudioError

TARGET_RATE = 16_000

_WIDTH_DTYPES = {1: np.uint8, 2: np.dtype("<i2"), 4: np.dtype("<i4")}


def load_audio_16k(path: str | Path) -> np.ndarray:
    """Decode a PCM WAV file to mono float32 samples at 16 kHz."""
    path = Path(path)
    if not path.is_file():
        raise UnreadableAudioError(f"audio file not found: {path}")
    try:
        with wave.open(str(path), "rb") as reader:
            channels = reader.getnchannels()
            width = reader.getsampwidth()
            rate = reader.getframerate()
            frames = reader.readframes(reader.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise UnreadableAudioError(f"{path}: not a decodable WAV file ({exc})")
    if width not in _WIDTH_DTYPES:
        raise UnreadableAudioError(f"{path}: unsupported sample width {width}")
    if channels < 1 or rate < 1 or not frames:
        raise UnreadableAudioError(f"{path}: empty or malformed audio stream")

    raw = np.frombuffer(frames, dtype=_WIDTH_DTYPES[width])
    if raw.size % channels:
        raw = raw[: raw.size - raw.size % channels]
    x = raw.reshape(-1, channels).astype(np.float64)
    if width == 1:
        x = (x - 128.0) / 128.0  # 8-bit wav is unsigned
    else:
        x = x / float(2 ** (8 * width - 1))
    mono = x.mean(axis=1)

    if rate != TARGET_RATE:
        g = math.gcd(TARGET_RATE, rate)
        mono = resample_poly(mono, TARGET_RATE // g, rate // g)
    return np.clip(mono, -1.0, 1.0).astype(np.float32)
