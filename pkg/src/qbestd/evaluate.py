"""Trial-set evaluation: confusion counts and term-weighted value.

A scored trial is (term_id, label, score) with label 1 meaning the query
does occur in the reference. TWV at a threshold is 1 minus the macro
average over terms of P_miss + beta * P_fa, with beta derived from the
false-alarm/miss costs and the target prior. A score equal to the
threshold counts as a miss: detection requires score strictly above.
MTWV sweeps every distinct score plus one threshold below them all; the
sweep is exhaustive because both rates are constant between consecutive
observed scores. Terms are averaged in sorted id order so results are
reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputDataError


class ManifestError(InputDataError):
    """A trial manifest violates the schema or references missing files."""


@dataclass(frozen=True)
class Trial:
    term_id: str
    query_path: str
    ref_path: str
    label: int


@dataclass
class TrialSet:
    terms: list[str]
    trials: list[Trial]


@dataclass(frozen=True)
class ScoredTrial:
    term_id: str
    label: int
    score: float


@dataclass
class TwvConfig:
    cost_fa: float = 1.0
    cost_miss: float = 10.0
    prior: float = 0.0278

    def __post_init__(self):
        if not (self.cost_fa > 0 and self.cost_miss > 0):
            raise InputDataError("twv costs must be positive")
        if not (0.0 < self.prior < 1.0):
            raise InputDataError(f"target prior must be in (0, 1): {self.prior}")

    @property
    def beta(self) -> float:
        return (self.cost_fa / self.cost_miss) * (1.0 / self.prior - 1.0)


@dataclass
class EvalReport:
    mtwv: float
    best_threshold: float
    confusion: dict[str, int]
    per_term: dict[str, dict[str, float]]  # p_miss / p_fa at best_threshold
    twv_curve: list[tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "mtwv": self.mtwv,
            "best_threshold": self.best_threshold,
            "confusion": dict(self.confusion),
            "per_term": {t: dict(r) for t, r in self.per_term.items()},
            "twv_curve": [[t, v] for t, v in self.twv_curve],
        }


def _group_by_term(scored: list[ScoredTrial]) -> dict[str, tuple[list[float], list[float]]]:
    """term -> (positive scores, negative scores), dropping positive-free terms."""
    if not scored:
        raise InputDataError("no scored trials to evaluate")
    groups: dict[str, tuple[list[float], list[float]]] = {}
    for trial in scored:
        if trial.label not in (0, 1):
            raise InputDataError(f"label must be 0 or 1: {trial.label!r}")
        if not math.isfinite(trial.score):
            raise InputDataError(f"non-finite score for term {trial.term_id!r}")
        pos, neg = groups.setdefault(trial.term_id, ([], []))
        (pos if trial.label == 1 else neg).append(trial.score)

    kept = {}
    for term in sorted(groups):
        pos, neg = groups[term]
        if not pos:
            warnings.warn(f"term {term!r} has no positive trials; excluded from TWV")
            continue
        kept[term] = (pos, neg)
    if not kept:
        raise InputDataError("every term lacks positive trials; TWV undefined")
    return kept


def _term_rates(pos: list[float], neg: list[float], threshold: float) -> tuple[float, float]:
    p_miss = sum(1 for s in pos if s <= threshold) / len(pos)
    # a term with no negative trials offers no false-alarm opportunity
    p_fa = sum(1 for s in neg if s > threshold) / len(neg) if neg else 0.0
    return p_miss, p_fa


def compute_twv(scored: list[ScoredTrial], threshold: float,
                cfg: TwvConfig | None = None) -> float:
    cfg = cfg or TwvConfig()
    groups = _group_by_term(scored)
    total = 0.0
    for term in sorted(groups):
        p_miss, p_fa = _term_rates(*groups[term], threshold)
        total += p_miss + cfg.beta * p_fa
    return 1.0 - total / len(groups)


def compute_mtwv(scored: list[ScoredTrial], cfg: TwvConfig | None = None) -> EvalReport:
    """Sweep all distinct scores (plus a below-all point) for the best TWV.

    mtwv is the swept maximum clamped into [0, 1]; best_threshold is the
    smallest threshold attaining the raw maximum. The below-all threshold
    is reported as min(score) - 1 so every field stays a plain finite
    number.
    """
    cfg = cfg or TwvConfig()
    groups = _group_by_term(scored)
    all_scores = sorted({s for pos, neg in groups.values() for s in pos + neg})
    thresholds = [all_scores[0] - 1.0] + all_scores

    curve: list[tuple[float, float]] = []
    best_threshold = thresholds[0]
    best_twv = -math.inf
    for threshold in thresholds:
        total = 0.0
        for term in sorted(groups):
            p_miss, p_fa = _term_rates(*groups[term], threshold)
            total += p_miss + cfg.beta * p_fa
        twv = 1.0 - total / len(groups)
        curve.append((threshold, twv))
        if twv > best_twv:
            best_twv = twv
            best_threshold = threshold

    per_term = {}
    for term in sorted(groups):
        p_miss, p_fa = _term_rates(*groups[term], best_threshold)
        per_term[term] = {"p_miss": p_miss, "p_fa": p_fa}
    return EvalReport(
        mtwv=min(1.0, max(0.0, best_twv)),
        best_threshold=best_threshold,
        confusion=confusion_matrix(scored, best_threshold),
        per_term=per_term,
        twv_curve=curve,
    )


def confusion_matrix(scored: list[ScoredTrial], threshold: float) -> dict[str, int]:
    counts = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for trial in scored:
        if not math.isfinite(trial.score):
            raise InputDataError(f"non-finite score for term {trial.term_id!r}")
        predicted = trial.score > threshold
        if trial.label == 1:
            counts["tp" if predicted else "fn"] += 1
        else:
            counts["fp" if predicted else "tn"] += 1
    return counts


def load_manifest(path: str | Path) -> TrialSet:
    """Read and validate a JSON trial manifest.

    Shape: {"terms": [{"id": str}], "trials": [{"term_id": str,
    "query": path, "reference": path, "label": 0|1}]}. Relative paths
    resolve against the manifest's directory; every referenced file must
    exist.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")

    raw_terms = doc.get("terms")
    raw_trials = doc.get("trials")
    if not isinstance(raw_terms, list) or not isinstance(raw_trials, list):
        raise ManifestError(f"{path}: 'terms' and 'trials' must be lists")

    term_ids: list[str] = []
    for entry in raw_terms:
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise ManifestError(f"{path}: each term needs a string 'id'")
        if entry["id"] in term_ids:
            raise ManifestError(f"{path}: duplicate term id {entry['id']!r}")
        term_ids.append(entry["id"])

    base = path.parent
    trials: list[Trial] = []
    for entry in raw_trials:
        if not isinstance(entry, dict):
            raise ManifestError(f"{path}: each trial must be an object")
        term_id = entry.get("term_id")
        if term_id not in term_ids:
            raise ManifestError(f"{path}: unknown term id {term_id!r}")
        label = entry.get("label")
        if isinstance(label, bool) or label not in (0, 1):
            raise ManifestError(f"{path}: label must be 0 or 1, got {label!r}")
        resolved = []
        for key in ("query", "reference"):
            ref = entry.get(key)
            if not isinstance(ref, str) or not ref:
                raise ManifestError(f"{path}: trial field {key!r} must be a path")
            file_path = Path(ref)
            if not file_path.is_absolute():
                file_path = base / file_path
            if not file_path.is_file():
                raise ManifestError(f"{path}: {key} file missing: {file_path}")
            resolved.append(str(file_path))
        trials.append(Trial(term_id=term_id, query_path=resolved[0],
                            ref_path=resolved[1], label=label))
    return TrialSet(terms=term_ids, trials=trials)
