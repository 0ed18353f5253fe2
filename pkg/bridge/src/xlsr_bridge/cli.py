"""Batch exporter CLI.

    bridge --in clip.wav --out features/
    bridge --in wavs_dir/ --out features/ --block 11 --device cpu

Each input <stem>.wav becomes <out>/<stem>.qbf (plus a .meta sidecar).
Files are processed sequentially; the first failure aborts with exit 1.
Usage errors exit 2.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bridge import DEFAULT_BLOCK, DEFAULT_MODEL, BridgeConfig, export_features
from .errors import BridgeError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge",
        description="export wav2vec2/XLSR hidden states as QBF1 feature files")
    parser.add_argument("--in", dest="input", required=True, metavar="WAV_OR_DIR",
                        help="a .wav file, or a directory scanned for *.wav")
    parser.add_argument("--out", dest="out_dir", required=True, metavar="DIR",
                        help="output directory, created if missing")
    parser.add_argument("--block", type=int, default=DEFAULT_BLOCK,
                        help="1-indexed encoder block to export")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="checkpoint id or local path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    source = Path(args.input)
    if source.is_dir():
        wavs = sorted(source.glob("*.wav"))
        if not wavs:
            print(f"no *.wav files under {source}", file=sys.stderr)
    elif source.is_file():
        wavs = [source]
    else:
        print(f"error: input not found: {source}", file=sys.stderr)
        return 2

    try:
        cfg = BridgeConfig(model_id=args.model, block=args.block,
                           device=args.device)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for wav in wavs:
            out = export_features(wav, out_dir / (wav.stem + ".qbf"), cfg)
            print(f"wrote {out}")
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
