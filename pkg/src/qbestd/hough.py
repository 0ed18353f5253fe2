"""Line detection over edge maps: Hough voting, tracing, acceptance.

A pixel (x, y) votes for every (theta, rho) with rho = x*cos(theta) +
y*sin(theta). Theta bins cover [0, pi) at the configured resolution; rho
bins cover [-D, D] for D = image diagonal, offset so rho = 0 is a bin
center. Accumulator peaks (vote threshold + 3x3 local maximum) are traced
back through the edge pixels near their line to recover concrete segments,
bridging along-line gaps up to max_line_gap. A segment counts as a query
match when it is long enough relative to the query frame count
(length > n - margin) and its slope sits strictly inside the configured
angle band, 15..80 degrees by default: near-horizontal or near-vertical
streaks are alignment artifacts, not time-aligned repetitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canny import EdgeMap
from .errors import InputDataError


@dataclass
class HoughParams:
    rho_resolution: float = 1.0
    theta_resolution: float = math.pi / 180.0
    vote_threshold: int = 30
    max_line_gap: float = 200.0
    margin_px: float = 50.0
    angle_min_deg: float = 15.0
    angle_max_deg: float = 80.0

    def __post_init__(self):
        if not (self.rho_resolution > 0):
            raise InputDataError(f"rho resolution must be positive: {self.rho_resolution}")
        if not (0 < self.theta_resolution <= math.pi / 2):
            raise InputDataError(
                f"theta resolution must be in (0, pi/2]: {self.theta_resolution}")
        if self.vote_threshold < 1:
            raise InputDataError(f"vote threshold must be >= 1: {self.vote_threshold}")
        if self.max_line_gap < 0 or self.margin_px < 0:
            raise InputDataError("max_line_gap and margin_px must be non-negative")
        if not (0 <= self.angle_min_deg < self.angle_max_deg <= 90):
            raise InputDataError(
                f"need 0 <= angle_min < angle_max <= 90, got "
                f"{self.angle_min_deg}, {self.angle_max_deg}")


@dataclass
class HoughAccumulator:
    votes: np.ndarray  # n_theta x n_rho
    thetas: np.ndarray  # bin-center angles, radians
    rho_offset: int  # bin index holding rho = 0
    rho_resolution: float

    def rho_of_bin(self, rho_bin: int) -> float:
        return (rho_bin - self.rho_offset) * self.rho_resolution


@dataclass(frozen=True)
class LineSegment:
    """Traced segment with endpoints in image pixel coordinates."""

    x0: int
    y0: int
    x1: int
    y1: int
    votes: int

    @property
    def length_px(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def theta_deg(self) -> float:
        """Slope angle from absolute deltas, in [0, 90] degrees."""
        return math.degrees(math.atan2(abs(self.y1 - self.y0), abs(self.x1 - self.x0)))

    @property
    def x_min(self) -> int:
        return min(self.x0, self.x1)

    @property
    def x_max(self) -> int:
        return max(self.x0, self.x1)


def _nearest_bin(values: np.ndarray, resolution: float) -> np.ndarray:
    # floor(x + 0.5): half-up, matching the image rendering convention
    return np.floor(values / resolution + 0.5).astype(np.int64)


def hough_accumulate(edge_map: EdgeMap, params: HoughParams | None = None) -> HoughAccumulator:
    params = params or HoughParams()
    h, w = edge_map.shape
    n_theta = int(np.ceil(math.pi / params.theta_resolution - 1e-9))
    thetas = np.arange(n_theta) * params.theta_resolution
    diag = math.hypot(h, w)
    rho_offset = int(math.ceil(diag / params.rho_resolution))
    n_rho = 2 * rho_offset + 1

    votes = np.zeros((n_theta, n_rho), dtype=np.int64)
    ys, xs = np.nonzero(edge_map.edges)
    if xs.size:
        cos = np.cos(thetas)
        sin = np.sin(thetas)
        for t in range(n_theta):
            rho = xs * cos[t] + ys * sin[t]
            bins = _nearest_bin(rho, params.rho_resolution) + rho_offset
            votes[t] = np.bincount(bins, minlength=n_rho)
    return HoughAccumulator(votes=votes, thetas=thetas, rho_offset=rho_offset,
                            rho_resolution=params.rho_resolution)


def _find_peaks(votes: np.ndarray, threshold: int) -> list[tuple[int, int, int]]:
    """(theta_bin, rho_bin, votes) cells that dominate their 3x3 neighborhood.

    Dominance is >=, so tied plateaus yield multiple peaks; duplicates are
    merged downstream. No wrap-around at the theta boundary.
    """
    padded = np.pad(votes, 1, mode="constant")
    is_max = np.ones(votes.shape, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            neighbor = padded[1 + dy : 1 + dy + votes.shape[0],
                              1 + dx : 1 + dx + votes.shape[1]]
            is_max &= votes >= neighbor
    ts, rs = np.nonzero(is_max & (votes >= threshold))
    peaks = [(int(t), int(r), int(votes[t, r])) for t, r in zip(ts, rs)]
    peaks.sort(key=lambda p: (-p[2], p[0], p[1]))
    return peaks


def extract_segments(edge_map: EdgeMap, acc: HoughAccumulator,
                     params: HoughParams | None = None) -> list[LineSegment]:
    """Trace accumulator peaks back to concrete edge-pixel segments."""
    params = params or HoughParams()
    ys, xs = np.nonzero(edge_map.edges)
    if xs.size == 0:
        return []
    band_halfwidth = params.rho_resolution / 2.0 + 0.5

    segments: list[LineSegment] = []
    for theta_bin, rho_bin, peak_votes in _find_peaks(acc.votes, params.vote_threshold):
        theta = float(acc.thetas[theta_bin])
        rho = acc.rho_of_bin(rho_bin)
        cos, sin = math.cos(theta), math.sin(theta)
        near = np.abs(xs * cos + ys * sin - rho) <= band_halfwidth
        px, py = xs[near], ys[near]
        if px.size == 0:
            continue
        # position along the line direction (-sin, cos)
        along = -px * sin + py * cos
        order = np.lexsort((px, py, along))
        px, py, along = px[order], py[order], along[order]

        run_start = 0
        for k in range(1, px.size + 1):
            if k == px.size or along[k] - along[k - 1] > params.max_line_gap:
                segments.append(_make_segment(px[run_start:k], py[run_start:k], peak_votes))
                run_start = k

    segments.sort(key=lambda s: (-s.length_px, -s.votes, s.x0, s.y0, s.x1, s.y1))
    return segments


def _make_segment(px: np.ndarray, py: np.ndarray, votes: int) -> LineSegment:
    a = (int(px[0]), int(py[0]))
    b = (int(px[-1]), int(py[-1]))
    if b < a:
        a, b = b, a
    return LineSegment(x0=a[0], y0=a[1], x1=b[0], y1=b[1], votes=votes)


def accept_segments(segments: list[LineSegment], query_frame_count: int,
                    params: HoughParams | None = None) -> list[LineSegment]:
    """Keep segments long enough for the query and sloped like a repetition."""
    params = params or HoughParams()
    if query_frame_count < 1:
        raise InputDataError(f"query frame count must be >= 1: {query_frame_count}")
    min_length = query_frame_count - params.margin_px
    return [s for s in segments
            if s.length_px > min_length
            and params.angle_min_deg < s.theta_deg < params.angle_max_deg]
