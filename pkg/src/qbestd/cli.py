"""Command-line front end.

Subcommands:

    extract       wav -> 39-dim MFCC feature file (QBF1)
    search        one query against one reference, JSON verdict
    scan          one query against every feature/wav file in a directory
    eval          score a labelled trial manifest, report MTWV
    baseline-dtw  windowed-DTW detector on one pair

Exit codes are stable across subcommands: 0 on success (a clean "not
detected" is still success), 2 for usage and input problems (bad flag
values, missing files, malformed manifests), 3 for data-contract
violations between otherwise well-formed inputs (feature dimension
mismatch, query longer than reference).

Inputs are dispatched on extension: .wav files run through the MFCC
front end, .qbf files are read as stored features. --features overrides
the dispatch when extensions lie. Flag defaults reproduce the library
defaults bit-exactly, so `qbestd search a.qbf b.qbf` equals the Python
one-liner with no arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .audio import load_wav, standardize
from .canny import CannyParams, canny
from .detector import detect, dtw_baseline, scan
from .distance import DistanceImage, distance_matrix, render_image, write_pgm
from .errors import DataContractError, InputDataError, QbestdError
from .evaluate import ScoredTrial, compute_mtwv, load_manifest
from .features import FeatureMatrix, extract_mfcc, read_feature_file, write_feature_file
from .hough import HoughParams

_KIND_EXTS = {"wav": {".wav"}, "qbf": {".qbf"}}


def _infer_kind(path: Path, mode: str) -> str:
    if mode != "auto":
        return mode
    suffix = path.suffix.lower()
    for kind, exts in _KIND_EXTS.items():
        if suffix in exts:
            return kind
    raise InputDataError(
        f"cannot infer input kind from extension of {path}; pass --features wav|qbf")


def _load_features(path: str | Path, mode: str = "auto") -> FeatureMatrix:
    p = Path(path)
    if not p.is_file():
        raise InputDataError(f"input file not found: {p}")
    if _infer_kind(p, mode) == "wav":
        return extract_mfcc(standardize(load_wav(p)))
    return read_feature_file(p)


def _canny_from(args: argparse.Namespace) -> CannyParams:
    return CannyParams(t_lower=args.t_lower, t_upper=args.t_upper,
                       gaussian_sigma=args.sigma)


def _hough_from(args: argparse.Namespace) -> HoughParams:
    return HoughParams(rho_resolution=args.rho,
                       theta_resolution=math.radians(args.theta_deg),
                       vote_threshold=args.vote_threshold,
                       max_line_gap=args.max_line_gap,
                       margin_px=args.margin,
                       angle_min_deg=args.angle_min,
                       angle_max_deg=args.angle_max)


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _pair_doc(query_path: str, ref_path: str, result) -> dict:
    return {
        "query_id": Path(query_path).stem,
        "results": [{"ref_id": Path(ref_path).stem, **result.to_dict()}],
    }


def cmd_extract(args: argparse.Namespace) -> int:
    src = Path(args.input)
    if not src.is_file():
        raise InputDataError(f"input file not found: {src}")
    dst = Path(args.output)
    if not dst.parent.is_dir():
        raise InputDataError(f"output directory does not exist: {dst.parent}")
    fm = extract_mfcc(standardize(load_wav(src)))
    write_feature_file(fm, dst)
    _emit({"input": str(src), "output": str(dst), "n_frames": fm.n_frames,
           "dim": fm.dim, "frame_hop_s": fm.frame_hop_s,
           "frame_offset_s": fm.frame_offset_s}, args.out)
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    query = _load_features(args.query, args.features)
    reference = _load_features(args.reference, args.features)
    result = detect(query, reference, metric=args.metric,
                    canny_params=_canny_from(args), hough_params=_hough_from(args))
    if args.emit_image or args.emit_edges:
        # Debug dumps re-run the cheap front half of the pipeline; keeping
        # detect() free of I/O concerns is worth the repeated work.
        image = render_image(distance_matrix(query, reference, metric=args.metric))
        if args.emit_image:
            write_pgm(image, args.emit_image)
        if args.emit_edges:
            edge_map = canny(image, _canny_from(args))
            write_pgm(DistanceImage(pixels=edge_map.edges.astype(np.uint8) * 255),
                      args.emit_edges)
    _emit(_pair_doc(args.query, args.reference, result), args.out)
    return 0


def cmd_scan(args: argparse.Namespace) -> int:
    root = Path(args.refs_dir)
    if not root.is_dir():
        raise InputDataError(f"reference directory not found: {root}")
    if args.features == "auto":
        exts = _KIND_EXTS["wav"] | _KIND_EXTS["qbf"]
    else:
        exts = _KIND_EXTS[args.features]
    paths = sorted(p for p in root.iterdir()
                   if p.is_file() and p.suffix.lower() in exts)
    query = _load_features(args.query, args.features)
    references: list[tuple[str, FeatureMatrix]] = []
    unreadable: list[dict] = []
    for p in paths:
        try:
            references.append((p.stem, _load_features(p, args.features)))
        except (QbestdError, OSError) as exc:
            unreadable.append({"ref_id": p.stem, "error": str(exc)})
    report = scan(query, references, metric=args.metric,
                  canny_params=_canny_from(args), hough_params=_hough_from(args),
                  jobs=args.jobs)
    items = []
    for item in report.items:
        doc = {"ref_id": item.ref_id}
        if item.result is not None:
            doc.update(item.result.to_dict())
        else:
            doc["error"] = item.error
        items.append(doc)
    items.extend(unreadable)
    items.sort(key=lambda d: ("error" in d, -d.get("score", 0.0), d["ref_id"]))
    _emit({"query_id": Path(args.query).stem,
           "total_wall_ms": round(report.total_wall_ms, 3),
           "results": items}, args.out)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise InputDataError("--jobs must be a positive integer")
    trial_set = load_manifest(args.manifest)
    if not trial_set.trials:
        raise InputDataError(f"manifest lists no trials: {args.manifest}")
    cache: dict[Path, FeatureMatrix] = {}
    for trial in trial_set.trials:
        for p in (trial.query_path, trial.ref_path):
            if p not in cache:
                cache[p] = _load_features(p, args.features)
    canny_params, hough_params = _canny_from(args), _hough_from(args)

    def run(trial) -> ScoredTrial:
        result = detect(cache[trial.query_path], cache[trial.ref_path],
                        metric=args.metric, canny_params=canny_params,
                        hough_params=hough_params)
        return ScoredTrial(term_id=trial.term_id, label=trial.label,
                           score=result.score)

    if args.jobs > 1 and len(trial_set.trials) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            scored = list(pool.map(run, trial_set.trials))
    else:
        scored = [run(t) for t in trial_set.trials]
    report = compute_mtwv(scored)
    _emit(report.to_dict(), args.out)
    return 0


def cmd_baseline_dtw(args: argparse.Namespace) -> int:
    query = _load_features(args.query, args.features)
    reference = _load_features(args.reference, args.features)
    result = dtw_baseline(query, reference, dtw_threshold=args.dtw_threshold)
    _emit(_pair_doc(args.query, args.reference, result), args.out)
    return 0


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--features", choices=("auto", "wav", "qbf"), default="auto",
                   help="force input interpretation instead of extension dispatch")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="write the JSON document here instead of stdout")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline parameters")
    g.add_argument("--metric", choices=("canberra", "cosine", "euclidean"),
                   default="canberra")
    g.add_argument("--t-lower", type=float, default=80.0,
                   help="hysteresis low threshold")
    g.add_argument("--t-upper", type=float, default=120.0,
                   help="hysteresis high threshold")
    g.add_argument("--sigma", type=float, default=1.4,
                   help="Gaussian blur sigma")
    g.add_argument("--rho", type=float, default=1.0,
                   help="Hough rho resolution in pixels")
    g.add_argument("--theta-deg", type=float, default=1.0,
                   help="Hough theta resolution in degrees")
    g.add_argument("--vote-threshold", type=int, default=30)
    g.add_argument("--max-line-gap", type=float, default=200.0,
                   help="largest bridged gap along a line, in pixels")
    g.add_argument("--margin", type=float, default=50.0,
                   help="accepted lines must be longer than n_query - margin")
    g.add_argument("--angle-min", type=float, default=15.0)
    g.add_argument("--angle-max", type=float, default=80.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbestd",
        description="query-by-example spoken term detection on distance images")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="wav to MFCC feature file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="write the JSON summary here instead of stdout")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("search", help="detect one query in one reference")
    p.add_argument("query")
    p.add_argument("reference")
    _add_pipeline_flags(p)
    _add_io_flags(p)
    p.add_argument("--emit-image", metavar="PATH", default=None,
                   help="dump the rendered distance image as PGM")
    p.add_argument("--emit-edges", metavar="PATH", default=None,
                   help="dump the binary edge map as a 0/255 PGM")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("scan", help="rank every reference in a directory")
    p.add_argument("query")
    p.add_argument("refs_dir")
    _add_pipeline_flags(p)
    _add_io_flags(p)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads; results are identical for any value")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("eval", help="score a trial manifest, report MTWV")
    p.add_argument("manifest")
    _add_pipeline_flags(p)
    _add_io_flags(p)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads; results are identical for any value")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline-dtw", help="windowed DTW detector on one pair")
    p.add_argument("query")
    p.add_argument("reference")
    _add_io_flags(p)
    p.add_argument("--dtw-threshold", type=float, default=0.5,
                   help="detection threshold on the window score")
    p.set_defaults(func=cmd_baseline_dtw)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (QbestdError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
