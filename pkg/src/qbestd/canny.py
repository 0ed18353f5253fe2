"""Canny edge detection tuned for distance-matrix images.

Pipeline: 5x5 Gaussian smoothing (edge-replicated), 3x3 Sobel gradients,
non-maximal suppression with the gradient direction quantized to one of
{0, 45, 90, 135} degrees, then two-threshold hysteresis with 8-connected
linking. Thresholds are compared against raw Sobel magnitudes on the 0-255
pixel domain; nothing is renormalized, so the pipeline commutes with
scaling pixel values and thresholds together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .distance import DistanceImage
from .errors import InputDataError

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T

# NMS neighbor steps (dy, dx) per quantized gradient sector; y grows downward
_SECTOR_STEPS = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}


@dataclass
class CannyParams:
    t_lower: float = 80.0
    t_upper: float = 120.0
    gaussian_sigma: float = 1.4

    def __post_init__(self):
        if not (0.0 < self.t_lower < self.t_upper):
            raise InputDataError(
                f"need 0 < t_lower < t_upper, got {self.t_lower}, {self.t_upper}")
        if not (self.gaussian_sigma > 0.0):
            raise InputDataError(f"gaussian sigma must be positive: {self.gaussian_sigma}")


@dataclass
class EdgeMap:
    edges: np.ndarray  # bool
    magnitude: np.ndarray  # raw Sobel gradient magnitude
    direction: np.ndarray  # gradient angle in radians, atan2 convention

    @property
    def shape(self) -> tuple[int, int]:
        return self.edges.shape


def _gaussian_kernel(sigma: float) -> np.ndarray:
    ax = np.arange(-2.0, 3.0)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def canny(image: DistanceImage | np.ndarray, params: CannyParams | None = None) -> EdgeMap:
    """Detect edges; accepts a DistanceImage or any 2-D intensity array."""
    params = params or CannyParams()
    pixels = image.pixels if isinstance(image, DistanceImage) else image
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2 or min(pixels.shape) < 5:
        raise InputDataError(
            f"image must be 2-D and at least 5x5 for the smoothing kernel, "
            f"got {pixels.shape}")

    smoothed = ndi.correlate(pixels, _gaussian_kernel(params.gaussian_sigma),
                             mode="nearest")
    gx = ndi.correlate(smoothed, _SOBEL_X, mode="nearest")
    gy = ndi.correlate(smoothed, _SOBEL_Y, mode="nearest")
    magnitude = np.hypot(gx, gy)
    direction = np.arctan2(gy, gx)

    ridge = _suppress_non_maxima(magnitude, direction)
    edges = _hysteresis(ridge, params.t_lower, params.t_upper)
    return EdgeMap(edges=edges, magnitude=magnitude, direction=direction)


def _suppress_non_maxima(magnitude: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Keep pixels whose magnitude is >= both neighbors along the gradient.

    The >= comparison keeps plateau pixels, so a symmetric 2-pixel-wide
    ridge survives whole. Out-of-image neighbors count as zero.
    """
    deg = np.degrees(direction) % 180.0
    sector = np.floor_divide(deg + 22.5, 45.0).astype(np.int64) % 4

    padded = np.pad(magnitude, 1, mode="constant")
    center = padded[1:-1, 1:-1]
    keep = np.zeros(magnitude.shape, dtype=bool)
    for s, (dy, dx) in _SECTOR_STEPS.items():
        fwd = padded[1 + dy : 1 + dy + magnitude.shape[0],
                     1 + dx : 1 + dx + magnitude.shape[1]]
        bwd = padded[1 - dy : 1 - dy + magnitude.shape[0],
                     1 - dx : 1 - dx + magnitude.shape[1]]
        keep |= (sector == s) & (center >= fwd) & (center >= bwd)
    return np.where(keep, magnitude, 0.0)


def _hysteresis(ridge: np.ndarray, t_lower: float, t_upper: float) -> np.ndarray:
    weak = ridge > t_lower
    strong = ridge > t_upper
    if not strong.any():
        return np.zeros_like(weak)
    labels, _ = ndi.label(weak, structure=np.ones((3, 3), dtype=np.int8))
    anchored = np.unique(labels[strong])
    return weak & np.isin(labels, anchored)
