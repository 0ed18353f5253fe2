"""Shared fixtures: a local wav2vec2 checkpoint with the real geometry.

The genuine XLSR-53 weights are not fetchable here, so tests run a
randomly initialized checkpoint with the same frame geometry (20 ms
conv stride, 1024-wide hidden states, stable layer norm) and enough
encoder depth for the default block index. Everything the exporter
promises (header fields, frame counts, determinism, planted-copy
detection) holds for any fixed weights; the real checkpoint swaps in
by id when the hub is reachable.
"""

import numpy as np
import pytest
import torch
from transformers import Wav2Vec2Config, Wav2Vec2Model


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    torch.manual_seed(0)
    cfg = Wav2Vec2Config(
        hidden_size=1024,
        num_hidden_layers=12,
        num_attention_heads=16,
        intermediate_size=512,     # slim FFN, same interface
        conv_dim=[64] * 7,         # slim conv stack, same stride plan
        num_conv_pos_embeddings=32,
        num_conv_pos_embedding_groups=16,
        do_stable_layer_norm=True,
        feat_extract_norm="layer",
    )
    model = Wav2Vec2Model(cfg).eval()
    path = tmp_path_factory.mktemp("ckpt") / "tiny-xlsr"
    model.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def wav_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("wavs")


def make_clip(seconds, seed, rate=16000):
    """Speech-shaped test audio: pink-ish noise with slow amplitude drift."""
    from scipy.signal import lfilter
    rng = np.random.default_rng(seed)
    n = int(rate * seconds)
    x = lfilter([1.0], [1.0, -0.95], rng.normal(size=n))  # pink-ish spectrum
    envelope = 0.4 + 0.6 * np.abs(np.sin(np.linspace(0.0, seconds * 6.0, n)))
    x *= envelope
    return 0.3 * x / np.abs(x).max()
