"""Input checks shared by the pipeline stages and the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, InputDataError
from .features import FeatureMatrix


def check_features(fm: FeatureMatrix, name: str) -> FeatureMatrix:
    if not isinstance(fm, FeatureMatrix):
        raise InputDataError(f"{name} must be a FeatureMatrix, got {type(fm).__name__}")
    if fm.data.ndim != 2 or fm.n_frames < 1 or fm.dim < 1:
        raise InputDataError(f"{name} is empty")
    if not np.isfinite(fm.data).all():
        raise InputDataError(f"{name} contains non-finite values")
    return fm


def check_same_dim(query: FeatureMatrix, reference: FeatureMatrix) -> None:
    if query.dim != reference.dim:
        raise DimensionMismatchError(
            f"query dim {query.dim} != reference dim {reference.dim}")
