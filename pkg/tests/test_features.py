"""MFCC extraction and QBF1 serialization."""

import struct

import numpy as np
import pytest

from qbestd.audio import AudioBuffer
from qbestd.errors import InputDataError
from qbestd.features import (FeatureFileError, FeatureMatrix, extract_mfcc,
                             read_feature_file, write_feature_file)

from conftest import feature_matrix


class TestExtractMfcc:
    def test_one_second_yields_98_frames_of_39(self):
        fm = extract_mfcc(AudioBuffer(np.zeros(16000), 16000, 1))
        assert fm.n_frames == 98
        assert fm.dim == 39

    def test_frame_geometry_metadata(self):
        fm = extract_mfcc(AudioBuffer(np.zeros(16000), 16000, 1))
        assert fm.frame_hop_s == 0.010
        assert fm.frame_offset_s == 0.0125
        assert fm.source == "native-mfcc"
        assert fm.frame_time_s(3) == pytest.approx(0.0425)

    def test_silence_is_exactly_zero_after_mean_subtraction(self):
        fm = extract_mfcc(AudioBuffer(np.zeros(16000), 16000, 1))
        assert np.all(fm.data[:, :13] == 0.0)
        assert np.all(fm.data == 0.0)  # deltas of constants vanish too

    def test_white_noise_is_finite_with_spread(self, rng):
        fm = extract_mfcc(AudioBuffer(rng.uniform(-0.9, 0.9, 32000), 16000, 1))
        assert np.isfinite(fm.data).all()
        assert (fm.data.var(axis=0) > 0).all()

    def test_static_coefficients_have_zero_mean(self, rng):
        fm = extract_mfcc(AudioBuffer(rng.uniform(-0.9, 0.9, 32000), 16000, 1))
        assert np.abs(np.asarray(fm.data[:, :13], dtype=np.float64).mean(axis=0)).max() < 1e-6

    def test_deterministic(self, rng):
        x = rng.uniform(-1, 1, 20000)
        a = extract_mfcc(AudioBuffer(x, 16000, 1))
        b = extract_mfcc(AudioBuffer(x, 16000, 1))
        assert np.array_equal(a.data, b.data)

    def test_exact_window_length_gives_single_frame(self):
        fm = extract_mfcc(AudioBuffer(np.zeros(400), 16000, 1))
        assert fm.n_frames == 1

    def test_window_minus_one_sample_rejected(self):
        with pytest.raises(InputDataError, match="399"):
            extract_mfcc(AudioBuffer(np.zeros(399), 16000, 1))

    def test_non_canonical_audio_rejected(self):
        with pytest.raises(InputDataError, match="16 kHz"):
            extract_mfcc(AudioBuffer(np.zeros(44100), 44100, 1))


class TestQbf1:
    def test_2x3_file_is_52_bytes_with_exact_header(self, tmp_path):
        fm = feature_matrix(np.arange(6, dtype=np.float32).reshape(2, 3),
                            hop=0.02, offset=0.01)
        path = tmp_path / "f.qbf"
        write_feature_file(fm, path)
        raw = path.read_bytes()
        assert len(raw) == 52
        assert raw[:4] == b"QBF1"
        assert struct.unpack_from("<I", raw, 4)[0] == 2
        assert struct.unpack_from("<I", raw, 8)[0] == 3
        assert struct.unpack_from("<d", raw, 12)[0] == 0.02
        assert struct.unpack_from("<d", raw, 20)[0] == 0.01
        np.testing.assert_array_equal(np.frombuffer(raw, "<f4", offset=28),
                                      np.arange(6, dtype=np.float32))

    @pytest.mark.parametrize("seed", range(5))
    def test_round_trip_is_bit_identical(self, seed, tmp_path):
        r = np.random.default_rng(seed)
        n, d = int(r.integers(1, 200)), int(r.integers(1, 64))
        fm = feature_matrix(r.standard_normal((n, d)).astype(np.float32),
                            hop=float(r.uniform(0.001, 0.1)),
                            offset=float(r.uniform(0, 0.05)))
        path = tmp_path / "rt.qbf"
        write_feature_file(fm, path)
        back = read_feature_file(path)
        assert np.array_equal(back.data, fm.data)
        assert back.data.dtype == np.float32
        assert back.frame_hop_s == fm.frame_hop_s
        assert back.frame_offset_s == fm.frame_offset_s
        assert (back.n_frames, back.dim) == (n, d)

    def test_bad_magic_rejected(self, tmp_path):
        fm = feature_matrix(np.ones((2, 3), dtype=np.float32))
        path = tmp_path / "bad.qbf"
        write_feature_file(fm, path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"QBF2"
        path.write_bytes(bytes(raw))
        with pytest.raises(FeatureFileError, match="magic"):
            read_feature_file(path)

    def test_truncated_payload_rejected(self, tmp_path):
        fm = feature_matrix(np.ones((10, 4), dtype=np.float32))
        path = tmp_path / "trunc.qbf"
        write_feature_file(fm, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FeatureFileError, match="truncated"):
            read_feature_file(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        fm = feature_matrix(np.ones((10, 4), dtype=np.float32))
        path = tmp_path / "long.qbf"
        write_feature_file(fm, path)
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(FeatureFileError, match="trailing"):
            read_feature_file(path)

    def test_non_finite_payload_rejected(self, tmp_path):
        data = np.ones((2, 2), dtype=np.float32)
        path = tmp_path / "nan.qbf"
        write_feature_file(feature_matrix(data), path)
        raw = bytearray(path.read_bytes())
        raw[28:32] = struct.pack("<f", float("nan"))
        path.write_bytes(bytes(raw))
        with pytest.raises(FeatureFileError, match="non-finite"):
            read_feature_file(path)

    def test_write_rejects_non_finite(self, tmp_path):
        data = np.ones((2, 2), dtype=np.float32)
        data[0, 0] = np.inf
        with pytest.raises(FeatureFileError, match="non-finite"):
            write_feature_file(feature_matrix(data), tmp_path / "x.qbf")

    def test_empty_declared_shape_rejected(self, tmp_path):
        path = tmp_path / "empty.qbf"
        header = struct.pack("<4sII dd", b"QBF1", 0, 39, 0.01, 0.0125)
        path.write_bytes(header)
        with pytest.raises(FeatureFileError, match="empty"):
            read_feature_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_feature_file(tmp_path / "none.qbf")
