"""End-to-end spoken-term detection over feature matrices.

The main pipeline turns a (query, reference) pair into a distance image,
runs edge and line detection on it, keeps line segments that are long and
steep enough to be time-aligned repetitions of the query, collapses
near-duplicate segments, and reports each survivor as a timed occurrence.
A windowed DTW search over the same pair serves as the baseline to compare
detection quality and runtime against.

`HoughDetector` and `DtwDetector` wrap the two searches in the familiar
estimator shape: `fit` binds the query template, `predict` and
`decision_function` sweep reference lists, `get_params` exposes every knob.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_features, check_same_dim
from .canny import CannyParams, canny
from .distance import distance_matrix, render_image
from .errors import InputDataError, QbestdError, QueryLongerThanReferenceError
from .features import FeatureMatrix
from .hough import (
    HoughParams,
    LineSegment,
    accept_segments,
    extract_segments,
    hough_accumulate,
)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Occurrence:
    """One detected repetition of the query inside the reference."""

    ref_start_s: float
    ref_end_s: float
    query_coverage: float  # fraction of query rows the match spans
    score: float  # segment length normalized by the full-match diagonal
    segment: LineSegment

    def to_dict(self) -> dict:
        return {
            "start_s": round(self.ref_start_s, 6),
            "end_s": round(self.ref_end_s, 6),
            "score": round(self.score, 6),
        }


@dataclass
class DetectionResult:
    occurrences: list[Occurrence]
    metric: str
    stage_timings_ms: dict[str, float]

    @property
    def detected(self) -> bool:
        return bool(self.occurrences)

    @property
    def count(self) -> int:
        return len(self.occurrences)

    @property
    def score(self) -> float:
        return max((o.score for o in self.occurrences), default=0.0)

    def to_dict(self) -> dict:
        return {
            "detected": self.detected,
            "count": self.count,
            "score": round(self.score, 6),
            "occurrences": [o.to_dict() for o in self.occurrences],
            "stage_timings_ms": {k: round(v, 3) for k, v in self.stage_timings_ms.items()},
        }


@dataclass
class ScanItem:
    ref_id: str
    result: DetectionResult | None
    error: str | None = None


@dataclass
class ScanReport:
    items: list[ScanItem]
    total_wall_ms: float


def _check_pair(query: FeatureMatrix, reference: FeatureMatrix) -> None:
    check_features(query, "query")
    check_features(reference, "reference")
    check_same_dim(query, reference)
    if query.n_frames > reference.n_frames:
        raise QueryLongerThanReferenceError(
            f"query has {query.n_frames} frames but reference only "
            f"{reference.n_frames}; swap is not implied")


def merge_occurrences(segments: list[LineSegment]) -> list[LineSegment]:
    """Collapse segments whose reference spans mostly coincide.

    Segments are grouped transitively whenever their [x_min, x_max] pixel
    intervals (inclusive) overlap by more than half of the shorter one;
    each group keeps its longest segment (ties: more votes, then smaller
    x_min). Output is sorted by x_min.
    """
    if not segments:
        return []
    parent = list(range(len(segments)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, a in enumerate(segments):
        for j in range(i + 1, len(segments)):
            b = segments[j]
            overlap = min(a.x_max, b.x_max) - max(a.x_min, b.x_min) + 1
            shorter = min(a.x_max - a.x_min, b.x_max - b.x_min) + 1
            if overlap > 0.5 * shorter:
                parent[find(i)] = find(j)

    groups: dict[int, list[LineSegment]] = {}
    for i, seg in enumerate(segments):
        groups.setdefault(find(i), []).append(seg)
    reps = [max(group, key=lambda s: (s.length_px, s.votes, -s.x_min))
            for group in groups.values()]
    reps.sort(key=lambda s: (s.x_min, s.x_max, s.y0, s.y1))
    return reps


def _occurrence(seg: LineSegment, query_frames: int, reference: FeatureMatrix) -> Occurrence:
    start_s = reference.frame_offset_s + seg.x_min * reference.frame_hop_s
    end_s = reference.frame_offset_s + (seg.x_max + 1) * reference.frame_hop_s
    coverage = (abs(seg.y1 - seg.y0) + 1) / query_frames
    score = min(1.0, seg.length_px / (query_frames * SQRT2))
    return Occurrence(ref_start_s=start_s, ref_end_s=end_s,
                      query_coverage=coverage, score=score, segment=seg)


def detect(query: FeatureMatrix, reference: FeatureMatrix, *,
           metric: str = "canberra",
           canny_params: CannyParams | None = None,
           hough_params: HoughParams | None = None) -> DetectionResult:
    """Run the full image pipeline on one (query, reference) pair."""
    _check_pair(query, reference)
    canny_params = canny_params or CannyParams()
    hough_params = hough_params or HoughParams()
    timings: dict[str, float] = {}
    started = time.perf_counter()

    mark = started
    dm = distance_matrix(query, reference, metric=metric)
    img = render_image(dm)
    timings["distance_ms"], mark = _lap(mark)

    edge_map = canny(img, canny_params)
    timings["edges_ms"], mark = _lap(mark)

    acc = hough_accumulate(edge_map, hough_params)
    segments = extract_segments(edge_map, acc, hough_params)
    kept = accept_segments(segments, query.n_frames, hough_params)
    reps = merge_occurrences(kept)
    timings["lines_ms"], mark = _lap(mark)

    occurrences = [_occurrence(s, query.n_frames, reference) for s in reps]
    timings["total_ms"] = (time.perf_counter() - started) * 1e3
    return DetectionResult(occurrences=occurrences, metric=metric,
                           stage_timings_ms=timings)


def _lap(mark: float) -> tuple[float, float]:
    now = time.perf_counter()
    return (now - mark) * 1e3, now


def scan(query: FeatureMatrix, references: list[tuple[str, FeatureMatrix]], *,
         metric: str = "canberra",
         canny_params: CannyParams | None = None,
         hough_params: HoughParams | None = None,
         jobs: int = 1) -> ScanReport:
    """Detect the query in every reference; failures never abort the scan.

    Items come back sorted by descending score, then id; failed items sort
    last. Per-item results are independent of `jobs`.
    """
    ids = [ref_id for ref_id, _ in references]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise InputDataError(f"duplicate reference ids: {dupes}")
    if jobs < 1:
        raise InputDataError(f"jobs must be >= 1: {jobs}")

    def run_one(item: tuple[str, FeatureMatrix]) -> ScanItem:
        ref_id, ref = item
        try:
            result = detect(query, ref, metric=metric,
                            canny_params=canny_params, hough_params=hough_params)
            return ScanItem(ref_id=ref_id, result=result)
        except QbestdError as exc:
            return ScanItem(ref_id=ref_id, result=None, error=str(exc))

    started = time.perf_counter()
    if jobs == 1 or len(references) <= 1:
        items = [run_one(item) for item in references]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            items = list(pool.map(run_one, references))
    total_ms = (time.perf_counter() - started) * 1e3

    items.sort(key=lambda it: (it.result is None,
                               -(it.result.score if it.result else 0.0),
                               it.ref_id))
    return ScanReport(items=items, total_wall_ms=total_ms)


# DTW step codes, in tie-preference order: diagonal beats advancing the
# query alone, which beats advancing the reference alone.
_DIAG, _VERT, _HORIZ = 0, 1, 2


def dtw_baseline(query: FeatureMatrix, reference: FeatureMatrix, *,
                 dtw_threshold: float = 0.5,
                 window_scale: float = 2.0,
                 step_divisor: int = 4) -> DetectionResult:
    """Windowed DTW search: the classical baseline for the same task.

    Windows of 2n reference frames starting every n/4 frames are aligned
    against the full query (steps diagonal / query-only / reference-only).
    The path is anchored at the window origin and may end anywhere on the
    last query row; cost is the path mean of Euclidean frame distances at
    the min-sum end column. The best window's score 1/(1+cost) must clear
    `dtw_threshold` to count as a detection, so at most one occurrence is
    ever reported.
    """
    _check_pair(query, reference)
    if not (0.0 <= dtw_threshold < 1.0):
        raise InputDataError(f"dtw threshold must be in [0, 1): {dtw_threshold}")
    if window_scale < 1.0 or step_divisor < 1:
        raise InputDataError("window_scale must be >= 1 and step_divisor >= 1")

    started = time.perf_counter()
    q = np.asarray(query.data, dtype=np.float64)
    r = np.asarray(reference.data, dtype=np.float64)
    n, m = query.n_frames, reference.n_frames
    step = max(1, n // step_divisor)
    width = int(round(window_scale * n))

    best_cost = math.inf
    best_start = 0
    best_span = (0, 0)
    for s in range(0, m, step):
        window = r[s : min(s + width, m)]
        dist = np.sqrt(np.maximum(
            ((q[:, None, :] - window[None, :, :]) ** 2).sum(axis=2), 0.0))
        cost, span = _align_window(dist)
        if cost < best_cost:
            best_cost = cost
            best_start = s
            best_span = span

    elapsed_ms = (time.perf_counter() - started) * 1e3
    timings = {"dtw_ms": elapsed_ms, "total_ms": elapsed_ms}
    score = 1.0 / (1.0 + best_cost)
    occurrences: list[Occurrence] = []
    if score > dtw_threshold:
        x0 = best_start + best_span[0]
        x1 = best_start + best_span[1]
        # stand-in segment: the alignment's bounding diagonal
        seg = LineSegment(x0=x0, y0=0, x1=x1, y1=n - 1, votes=0)
        start_s = reference.frame_offset_s + x0 * reference.frame_hop_s
        end_s = reference.frame_offset_s + (x1 + 1) * reference.frame_hop_s
        occurrences.append(Occurrence(ref_start_s=start_s, ref_end_s=end_s,
                                      query_coverage=1.0, score=score, segment=seg))
    return DetectionResult(occurrences=occurrences, metric="euclidean",
                           stage_timings_ms=timings)


def _align_window(dist: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Min-sum DTW over one window; returns (path-mean cost, matched span).

    Wavefront sweep over anti-diagonals reproduces the cell-by-cell
    recurrence exactly while keeping the inner ops vectorized.
    """
    n, w = dist.shape
    total = np.full((n, w), np.inf)
    length = np.zeros((n, w), dtype=np.int64)
    pred = np.full((n, w), -1, dtype=np.int8)
    total[0, 0] = dist[0, 0]
    length[0, 0] = 1

    for k in range(1, n + w - 1):
        i_lo = max(0, k - (w - 1))
        i_hi = min(n - 1, k)
        ii = np.arange(i_lo, i_hi + 1)
        jj = k - ii
        diag = _gather(total, ii - 1, jj - 1)
        vert = _gather(total, ii - 1, jj)
        horiz = _gather(total, ii, jj - 1)
        best = np.minimum(np.minimum(diag, vert), horiz)
        choice = np.where(best == diag, _DIAG, np.where(best == vert, _VERT, _HORIZ))
        total[ii, jj] = dist[ii, jj] + best
        pred[ii, jj] = choice
        src_len = np.choose(choice, [
            _gather(length, ii - 1, jj - 1),
            _gather(length, ii - 1, jj),
            _gather(length, ii, jj - 1),
        ])
        length[ii, jj] = src_len + 1

    end_col = int(np.argmin(total[n - 1]))  # ties resolve to the smallest column
    cost = float(total[n - 1, end_col]) / float(length[n - 1, end_col])
    span_start = _trace_span_start(pred, end_col)
    return cost, (span_start, end_col)


def _gather(grid: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    ok = (ii >= 0) & (jj >= 0)
    out = np.full(ii.shape, np.inf, dtype=np.float64)
    out[ok] = grid[ii[ok], jj[ok]]
    return out


def _trace_span_start(pred: np.ndarray, end_col: int) -> int:
    """Backtrack to the last path cell on query row 0.

    The path is anchored at the window origin, so a leading run of
    reference-only steps along row 0 is window placement, not a match; the
    reported span starts where the query actually begins consuming frames.
    """
    i, j = pred.shape[0] - 1, end_col
    while i > 0:
        p = pred[i, j]
        if p == _DIAG:
            i, j = i - 1, j - 1
        elif p == _VERT:
            i -= 1
        else:
            j -= 1
    return j


class HoughDetector(BaseEstimator):
    """Image-pipeline detector in estimator form.

    `fit` binds the query template; `detect` runs one reference,
    `predict`/`decision_function` run lists of references, `scan` runs an
    id-keyed corpus. All pipeline knobs are constructor parameters so
    `get_params`/`set_params` round-trip them.
    """

    def __init__(self, metric: str = "canberra", t_lower: float = 80.0,
                 t_upper: float = 120.0, gaussian_sigma: float = 1.4,
                 rho_resolution: float = 1.0,
                 theta_resolution: float = math.pi / 180.0,
                 vote_threshold: int = 30, max_line_gap: float = 200.0,
                 margin_px: float = 50.0, angle_min_deg: float = 15.0,
                 angle_max_deg: float = 80.0):
        self.metric = metric
        self.t_lower = t_lower
        self.t_upper = t_upper
        self.gaussian_sigma = gaussian_sigma
        self.rho_resolution = rho_resolution
        self.theta_resolution = theta_resolution
        self.vote_threshold = vote_threshold
        self.max_line_gap = max_line_gap
        self.margin_px = margin_px
        self.angle_min_deg = angle_min_deg
        self.angle_max_deg = angle_max_deg

    def _canny_params(self) -> CannyParams:
        return CannyParams(t_lower=self.t_lower, t_upper=self.t_upper,
                           gaussian_sigma=self.gaussian_sigma)

    def _hough_params(self) -> HoughParams:
        return HoughParams(rho_resolution=self.rho_resolution,
                           theta_resolution=self.theta_resolution,
                           vote_threshold=self.vote_threshold,
                           max_line_gap=self.max_line_gap,
                           margin_px=self.margin_px,
                           angle_min_deg=self.angle_min_deg,
                           angle_max_deg=self.angle_max_deg)

    def fit(self, query: FeatureMatrix, y=None) -> "HoughDetector":
        check_features(query, "query")
        self.query_ = query
        return self

    def _fitted_query(self) -> FeatureMatrix:
        if not hasattr(self, "query_"):
            raise NotFittedError("call fit(query) before detecting")
        return self.query_

    def detect(self, reference: FeatureMatrix) -> DetectionResult:
        return detect(self._fitted_query(), reference, metric=self.metric,
                      canny_params=self._canny_params(),
                      hough_params=self._hough_params())

    def predict(self, references: list[FeatureMatrix]) -> np.ndarray:
        return np.array([self.detect(ref).detected for ref in references], dtype=bool)

    def decision_function(self, references: list[FeatureMatrix]) -> np.ndarray:
        return np.array([self.detect(ref).score for ref in references], dtype=np.float64)

    def scan(self, references: list[tuple[str, FeatureMatrix]], jobs: int = 1) -> ScanReport:
        return scan(self._fitted_query(), references, metric=self.metric,
                    canny_params=self._canny_params(),
                    hough_params=self._hough_params(), jobs=jobs)


class DtwDetector(BaseEstimator):
    """Windowed-DTW baseline in the same estimator shape as HoughDetector."""

    def __init__(self, dtw_threshold: float = 0.5, window_scale: float = 2.0,
                 step_divisor: int = 4):
        self.dtw_threshold = dtw_threshold
        self.window_scale = window_scale
        self.step_divisor = step_divisor

    def fit(self, query: FeatureMatrix, y=None) -> "DtwDetector":
        check_features(query, "query")
        self.query_ = query
        return self

    def _fitted_query(self) -> FeatureMatrix:
        if not hasattr(self, "query_"):
            raise NotFittedError("call fit(query) before detecting")
        return self.query_

    def detect(self, reference: FeatureMatrix) -> DetectionResult:
        return dtw_baseline(self._fitted_query(), reference,
                            dtw_threshold=self.dtw_threshold,
                            window_scale=self.window_scale,
                            step_divisor=self.step_divisor)

    def predict(self, references: list[FeatureMatrix]) -> np.ndarray:
        return np.array([self.detect(ref).detected for ref in references], dtype=bool)

    def decision_function(self, references: list[FeatureMatrix]) -> np.ndarray:
        return np.array([self.detect(ref).score for ref in references], dtype=np.float64)
