"""Frame-to-frame distance matrices and their grayscale rendering.

A query of n frames against a reference of m frames yields an n x m
matrix: row i holds the distances from query frame i to every reference
frame. Rendering min-max normalizes to 8-bit gray, so similar frame pairs
come out dark and a query occurrence shows up as a dark quasi-diagonal
streak for the line detector to find.

All metrics are computed with one broadcast-and-reduce per query chunk,
summing over the feature axis in index order. That keeps results exactly
symmetric: distance_matrix(a, b).T and distance_matrix(b, a) match
bitwise, not just approximately.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_features, check_same_dim
from .errors import InputDataError
from .features import FeatureMatrix

METRICS = ("canberra", "cosine", "euclidean")

# cap on floats materialized per broadcast chunk (chunk * m * dim)
_CHUNK_BUDGET = 4_000_000


@dataclass
class DistanceMatrix:
    values: np.ndarray  # n x m float64
    metric: str

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass
class DistanceImage:
    pixels: np.ndarray  # n x m uint8

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _canberra_block(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    num = np.abs(q[:, None, :] - r[None, :, :])
    den = np.abs(q)[:, None, :] + np.abs(r)[None, :, :]
    # 0/0 summands contribute zero: both entries are zero, so they agree
    quot = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return quot.sum(axis=-1)


def _euclidean_block(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    diff = q[:, None, :] - r[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _cosine_block(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    dots = (q[:, None, :] * r[None, :, :]).sum(axis=-1)
    norms = np.sqrt((q * q).sum(axis=-1))[:, None] * np.sqrt((r * r).sum(axis=-1))[None, :]
    # an all-zero frame has no direction; treat it as maximally dissimilar-neutral
    sim = np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)
    return np.clip(1.0 - sim, 0.0, 2.0)


_BLOCK = {"canberra": _canberra_block, "euclidean": _euclidean_block,
          "cosine": _cosine_block}


def distance_matrix(query: FeatureMatrix, reference: FeatureMatrix,
                    metric: str = "canberra") -> DistanceMatrix:
    """All pairwise frame distances between query rows and reference rows."""
    if metric not in _BLOCK:
        raise InputDataError(f"unknown metric {metric!r}, expected one of {METRICS}")
    check_features(query, "query")
    check_features(reference, "reference")
    check_same_dim(query, reference)

    q = np.asarray(query.data, dtype=np.float64)
    r = np.asarray(reference.data, dtype=np.float64)
    block = _BLOCK[metric]
    chunk = max(1, _CHUNK_BUDGET // max(1, r.shape[0] * r.shape[1]))
    out = np.empty((q.shape[0], r.shape[0]))
    for start in range(0, q.shape[0], chunk):
        out[start : start + chunk] = block(q[start : start + chunk], r)
    return DistanceMatrix(values=out, metric=metric)


def render_image(dm: DistanceMatrix) -> DistanceImage:
    """Min-max normalize to uint8 with half-up rounding; flat input -> all 0."""
    v = dm.values
    vmin = v.min()
    vmax = v.max()
    if vmax == vmin:
        return DistanceImage(pixels=np.zeros(v.shape, dtype=np.uint8))
    pixels = np.floor(255.0 * (v - vmin) / (vmax - vmin) + 0.5).astype(np.uint8)
    return DistanceImage(pixels=pixels)


def write_pgm(img: DistanceImage, path: str | Path) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def read_pgm(path: str | Path) -> DistanceImage:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise InputDataError(f"{path}: not a binary PGM written by this package")
    width, height = (int(tok) for tok in parts[1].split())
    if parts[2] != b"255":
        raise InputDataError(f"{path}: unsupported PGM maxval")
    payload = parts[3]
    if len(payload) != width * height:
        raise InputDataError(f"{path}: PGM payload size mismatch")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return DistanceImage(pixels=pixels.copy())
