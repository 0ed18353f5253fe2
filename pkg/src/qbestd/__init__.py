"""Query-by-example spoken term detection on frame-distance images.

A query recording and a reference recording are compared frame by
frame; occurrences of the query show up as quasi-diagonal dark lines in
the rendered distance image. The pipeline finds those lines with
classical image processing (Canny edges, Hough voting) instead of
alignment search, which makes it training-free and fast enough to scan
large reference sets. A windowed-DTW baseline and an MTWV evaluation
harness ship alongside for comparison.

Typical use:

    from qbestd import detect, extract_mfcc, load_wav, standardize

    query = extract_mfcc(standardize(load_wav("query.wav")))
    reference = extract_mfcc(standardize(load_wav("reference.wav")))
    result = detect(query, reference)
    for occ in result.occurrences:
        print(occ.ref_start_s, occ.ref_end_s, occ.score)
"""

from .audio import AudioBuffer, MalformedWavError, UnsupportedCodecError, load_wav, standardize
from .canny import CannyParams, EdgeMap, canny
from .detector import (
    DetectionResult,
    DtwDetector,
    HoughDetector,
    Occurrence,
    ScanItem,
    ScanReport,
    detect,
    dtw_baseline,
    merge_occurrences,
    scan,
)
from .distance import (
    DistanceImage,
    DistanceMatrix,
    distance_matrix,
    read_pgm,
    render_image,
    write_pgm,
)
from .errors import (
    DataContractError,
    DimensionMismatchError,
    InputDataError,
    QbestdError,
    QueryLongerThanReferenceError,
)
from .evaluate import (
    EvalReport,
    ManifestError,
    ScoredTrial,
    Trial,
    TrialSet,
    TwvConfig,
    compute_mtwv,
    compute_twv,
    confusion_matrix,
    load_manifest,
)
from .features import (
    FeatureFileError,
    FeatureMatrix,
    extract_mfcc,
    read_feature_file,
    write_feature_file,
)
from .hough import (
    HoughAccumulator,
    HoughParams,
    LineSegment,
    accept_segments,
    extract_segments,
    hough_accumulate,
)

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "CannyParams",
    "DataContractError",
    "DetectionResult",
    "DimensionMismatchError",
    "DistanceImage",
    "DistanceMatrix",
    "DtwDetector",
    "EdgeMap",
    "EvalReport",
    "FeatureFileError",
    "FeatureMatrix",
    "HoughAccumulator",
    "HoughDetector",
    "HoughParams",
    "InputDataError",
    "LineSegment",
    "MalformedWavError",
    "ManifestError",
    "Occurrence",
    "QbestdError",
    "QueryLongerThanReferenceError",
    "ScanItem",
    "ScanReport",
    "ScoredTrial",
    "Trial",
    "TrialSet",
    "TwvConfig",
    "UnsupportedCodecError",
    "accept_segments",
    "canny",
    "compute_mtwv",
    "compute_twv",
    "confusion_matrix",
    "detect",
    "distance_matrix",
    "dtw_baseline",
    "extract_mfcc",
    "extract_segments",
    "hough_accumulate",
    "load_manifest",
    "load_wav",
    "merge_occurrences",
    "read_feature_file",
    "read_pgm",
    "render_image",
    "scan",
    "standardize",
    "write_feature_file",
    "write_pgm",
]
