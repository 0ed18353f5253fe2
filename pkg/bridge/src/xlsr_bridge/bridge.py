"""Export wav2vec2/XLSR encoder hidden states into QBF1 files.

The exporter runs a pretrained wav2vec2-family checkpoint in inference
mode and stores the hidden state after one chosen encoder block (block
11 of XLSR-53 by default, 1-indexed) as a frame x dim float32 matrix.
The model's convolutional front end strides 20 ms per frame at 16 kHz;
frame centers are taken at half a stride. Exports are deterministic
for fixed weights: eval mode disables dropout and spec augment, and
all ops run without gradients.

torch and transformers are imported lazily so that merely importing
this package (or printing CLI help) stays cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import load_audio_16k
from .errors import InvalidConfigError, ModelUnavailableError
from .qbf import write_qbf

DEFAULT_MODEL = "facebook/wav2vec2-large-xlsr-53"
DEFAULT_BLOCK = 11
MAX_BLOCK = 24  # encoder depth of the default checkpoint
FRAME_HOP_S = 0.020
FRAME_OFFSET_S = 0.010  # frame center at half a stride

_MODEL_CACHE: dict[tuple[str, str], object] = {}


@dataclass(frozen=True)
class BridgeConfig:
    model_id: str = DEFAULT_MODEL
    block: int = DEFAULT_BLOCK
    device: str = "cpu"

    def __post_init__(self):
        if not self.model_id:
            raise InvalidConfigError("model_id must be a non-empty string")
        if not isinstance(self.block, int) or not 1 <= self.block <= MAX_BLOCK:
            raise InvalidConfigError(
                f"block index must be an integer in [1, {MAX_BLOCK}]: {self.block!r}")


def _load_model(model_id: str, device: str):
    key = (model_id, device)
    if key in _MODEL_CACHE:
        return _MODEL_CACHE[key]
    from transformers import Wav2Vec2Model
    try:
        model = Wav2Vec2Model.from_pretrained(model_id)
    except (OSError, ValueError) as exc:
        raise ModelUnavailableError(
            f"cannot load checkpoint {model_id!r} (offline, missing, or "
            f"corrupt): {exc}") from exc
    model.eval().to(device)
    _MODEL_CACHE[key] = model
    return model


def _normalize(samples: np.ndarray) -> np.ndarray:
    # zero-mean unit-variance input, the documented preprocessing for
    # the XLSR-53 family
    mean = samples.mean()
    var = samples.var()
    return ((samples - mean) / np.sqrt(var + 1e-7)).astype(np.float32)


def export_features(wav_path: str | Path, out_path: str | Path,
                    cfg: BridgeConfig | None = None) -> Path:
    """Run one WAV file through the model; write <out_path> plus sidecar.

    Returns the output path. The sidecar (<out_path>.meta) records the
    checkpoint, the block choice, and the layer-norm convention, which
    the binary header cannot carry.
    """
    cfg = cfg or BridgeConfig()
    samples = _normalize(load_audio_16k(wav_path))
    model = _load_model(cfg.model_id, cfg.device)
    depth = int(model.config.num_hidden_layers)
    if cfg.block > depth:
        raise InvalidConfigError(
            f"block {cfg.block} exceeds the {depth}-layer encoder of "
            f"{cfg.model_id!r}")

    import torch
    with torch.no_grad():
        batch = torch.from_numpy(samples)[None, :].to(cfg.device)
        output = model(batch, output_hidden_states=True)
    # hidden_states[0] is the conv-feature projection; entry k is the
    # residual stream after encoder block k (1-indexed), taken before
    # the encoder's final layer norm for every k < depth
    hidden = output.hidden_states[cfg.block][0].cpu().numpy()

    out_path = Path(out_path)
    write_qbf(out_path, hidden, FRAME_HOP_S, FRAME_OFFSET_S)
    sidecar = out_path.with_name(out_path.name + ".meta")
    sidecar.write_text(
        f"model: {cfg.model_id}\n"
        f"encoder_block: {cfg.block} (1-indexed hidden state after that block)\n"
        "layer_norm: raw block output, before the encoder-final layer norm\n"
        "input_norm: zero-mean unit-variance per file\n"
        f"frame_hop_s: {FRAME_HOP_S}\n"
        f"frame_offset_s: {FRAME_OFFSET_S}\n",
        encoding="utf-8")
    return out_path
