"""Frame-level features and the QBF1 exchange format.

The native extractor produces 39-dimensional MFCCs: 13 cepstra (DCT-II,
orthonormal) from 26 log mel filterbank energies, per-utterance cepstral
mean subtraction, plus first- and second-order regression deltas. Frames
use a 25 ms Hamming window every 10 ms, so frame i is centered at
12.5 ms + i * 10 ms.

QBF1 is a little-endian binary container for any frame matrix:

    bytes 0-3   ASCII "QBF1"
    bytes 4-7   u32 frame count
    bytes 8-11  u32 feature dimension
    bytes 12-19 f64 frame hop in seconds
    bytes 20-27 f64 center time of frame 0 in seconds
    bytes 28-   frame-major float32 payload

This is the boundary outside feature producers (the XLSR bridge emits it),
so reading validates everything it can: magic, declared sizes, finiteness.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft

from .audio import TARGET_RATE, AudioBuffer
from .errors import InputDataError

QBF1_MAGIC = b"QBF1"
_HEADER = struct.Struct("<4sII dd")

WINDOW_SAMPLES = 400  # 25 ms at 16 kHz
HOP_SAMPLES = 160  # 10 ms
FFT_SIZE = 512
MEL_FILTERS = 26
CEPSTRA = 13
PREEMPHASIS = 0.97
LOG_FLOOR = 1e-10
DELTA_REACH = 2

MFCC_HOP_S = HOP_SAMPLES / TARGET_RATE
MFCC_OFFSET_S = WINDOW_SAMPLES / (2 * TARGET_RATE)


class FeatureFileError(InputDataError):
    """A QBF1 file violates the format contract."""


@dataclass
class FeatureMatrix:
    """Frames-by-dimensions float32 matrix with its time geometry."""

    data: np.ndarray
    frame_hop_s: float
    frame_offset_s: float
    source: str = "unknown"

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def frame_time_s(self, index: int) -> float:
        return self.frame_offset_s + index * self.frame_hop_s


def _validate(fm: FeatureMatrix, origin: str) -> None:
    if fm.data.ndim != 2 or fm.n_frames < 1 or fm.dim < 1:
        raise FeatureFileError(f"{origin}: feature matrix must be non-empty and 2-D")
    if not np.isfinite(fm.data).all():
        raise FeatureFileError(f"{origin}: non-finite feature values")
    if not (fm.frame_hop_s > 0):
        raise FeatureFileError(f"{origin}: frame hop must be positive")


def _mel(hz):
    return 2595.0 * np.log10(1.0 + hz / 700.0)


def _mel_inv(mel):
    return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)


def _filterbank() -> np.ndarray:
    """26 triangular filters, equally spaced on the mel scale over 0-8 kHz."""
    edges_hz = _mel_inv(np.linspace(_mel(0.0), _mel(TARGET_RATE / 2.0), MEL_FILTERS + 2))
    bin_hz = np.arange(FFT_SIZE // 2 + 1) * TARGET_RATE / FFT_SIZE
    bank = np.zeros((MEL_FILTERS, bin_hz.size))
    for m in range(MEL_FILTERS):
        lo, mid, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        rising = (bin_hz - lo) / (mid - lo)
        falling = (hi - bin_hz) / (hi - mid)
        bank[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def _regression_delta(c: np.ndarray) -> np.ndarray:
    """Least-squares slope over a +/-2 frame window, edges replicated."""
    padded = np.pad(c, ((DELTA_REACH, DELTA_REACH), (0, 0)), mode="edge")
    n = c.shape[0]
    num = np.zeros_like(c)
    for k in range(1, DELTA_REACH + 1):
        num += k * (padded[DELTA_REACH + k : DELTA_REACH + k + n]
                    - padded[DELTA_REACH - k : DELTA_REACH - k + n])
    return num / (2.0 * sum(k * k for k in range(1, DELTA_REACH + 1)))


def extract_mfcc(buf: AudioBuffer) -> FeatureMatrix:
    """Extract the native 39-dim MFCC matrix from standardized audio."""
    if buf.sample_rate != TARGET_RATE or buf.channel_count != 1:
        raise InputDataError("extract_mfcc expects standardized mono 16 kHz audio")
    x = np.asarray(buf.samples, dtype=np.float64)
    if x.size < WINDOW_SAMPLES:
        raise InputDataError(
            f"audio too short for one frame: {x.size} < {WINDOW_SAMPLES} samples")

    emphasized = np.concatenate([x[:1], x[1:] - PREEMPHASIS * x[:-1]])
    n_frames = (x.size - WINDOW_SAMPLES) // HOP_SAMPLES + 1
    idx = np.arange(WINDOW_SAMPLES)[None, :] + HOP_SAMPLES * np.arange(n_frames)[:, None]
    frames = emphasized[idx] * np.hamming(WINDOW_SAMPLES)[None, :]

    magnitude = np.abs(np.fft.rfft(frames, FFT_SIZE, axis=1))
    energies = magnitude @ _filterbank().T
    log_energies = np.log(np.maximum(energies, LOG_FLOOR))
    cepstra = scipy.fft.dct(log_energies, type=2, norm="ortho", axis=1)[:, :CEPSTRA]

    # anchored mean: exact zeros when all frames are identical (e.g. silence)
    anchor = cepstra[:1]
    cepstra = cepstra - anchor - (cepstra - anchor).mean(axis=0, keepdims=True)
    delta = _regression_delta(cepstra)
    delta2 = _regression_delta(delta)
    data = np.hstack([cepstra, delta, delta2]).astype(np.float32)
    return FeatureMatrix(data=data, frame_hop_s=MFCC_HOP_S,
                         frame_offset_s=MFCC_OFFSET_S, source="native-mfcc")


def write_feature_file(fm: FeatureMatrix, path: str | Path) -> None:
    _validate(fm, "write")
    header = _HEADER.pack(QBF1_MAGIC, fm.n_frames, fm.dim,
                          fm.frame_hop_s, fm.frame_offset_s)
    payload = np.ascontiguousarray(fm.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_feature_file(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such feature file: {path}")
    raw = path.read_bytes()
    if len(raw) < 4 or raw[:4] != QBF1_MAGIC:
        raise FeatureFileError(f"{path}: bad magic, not a QBF1 file")
    if len(raw) < _HEADER.size:
        raise FeatureFileError(f"{path}: truncated header")
    _, n_frames, dim, hop, offset = _HEADER.unpack_from(raw, 0)
    if n_frames < 1 or dim < 1:
        raise FeatureFileError(f"{path}: declared shape {n_frames}x{dim} is empty")
    expected = _HEADER.size + 4 * n_frames * dim
    if len(raw) < expected:
        raise FeatureFileError(
            f"{path}: payload truncated, expected {expected} bytes, got {len(raw)}")
    if len(raw) > expected:
        raise FeatureFileError(f"{path}: {len(raw) - expected} trailing bytes")
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n_frames, dim)
    fm = FeatureMatrix(data=data.copy(), frame_hop_s=hop, frame_offset_s=offset,
                       source="external")
    _validate(fm, str(path))
    return fm
