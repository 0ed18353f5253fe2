"""Distance metrics, image rendering, and PGM output."""

import numpy as np
import pytest

from qbestd.distance import (DistanceMatrix, distance_matrix, read_pgm,
                             render_image, write_pgm)
from qbestd.errors import DimensionMismatchError, InputDataError

from conftest import feature_matrix, planted_pair


def canberra_oracle(q, r):
    """Scalar double-loop reference implementation."""
    n, m = len(q), len(r)
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(q.shape[1]):
                num = abs(float(q[i, k]) - float(r[j, k]))
                den = abs(float(q[i, k])) + abs(float(r[j, k]))
                if den > 0.0:
                    acc += num / den
            out[i, j] = acc
    return out


class TestCanberra:
    def test_identical_frames_give_exact_zero(self, rng):
        q = feature_matrix(rng.standard_normal((6, 12)))
        dm = distance_matrix(q, q, "canberra")
        assert np.all(np.diag(dm.values) == 0.0)

    def test_opposed_support_hits_dimension_bound(self):
        q = feature_matrix(np.array([[1.0, 0.0]]))
        r = feature_matrix(np.array([[0.0, 1.0]]))
        assert distance_matrix(q, r, "canberra").values[0, 0] == 2.0

    def test_zero_over_zero_summands_drop_out(self):
        q = feature_matrix(np.array([[0.0, 1.0], [0.0, 5.0]]))
        r = feature_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        dm = distance_matrix(q, r, "canberra").values
        assert dm[0, 0] == 0.0  # both summands are 0/0 or equal
        assert dm[1, 1] == 1.0  # |5-0|/(5+0), leading 0/0 dropped

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_double_loop_oracle(self, seed):
        r = np.random.default_rng(seed)
        n, m, d = (int(r.integers(1, 30)) for _ in range(3))
        q = r.standard_normal((n, d))
        ref = r.standard_normal((m, d))
        # sprinkle exact zeros to exercise the 0/0 convention
        q[r.uniform(size=q.shape) < 0.2] = 0.0
        ref[r.uniform(size=ref.shape) < 0.2] = 0.0
        fq, fr = feature_matrix(q), feature_matrix(ref)
        got = distance_matrix(fq, fr, "canberra").values
        want = canberra_oracle(np.asarray(fq.data, np.float64),
                               np.asarray(fr.data, np.float64))
        np.testing.assert_allclose(got, want, rtol=1e-6, atol=0)

    def test_bounded_by_dimension(self, rng):
        d = 17
        q = feature_matrix(rng.standard_normal((20, d)))
        r = feature_matrix(rng.standard_normal((30, d)))
        v = distance_matrix(q, r, "canberra").values
        assert v.min() >= 0.0 and v.max() <= d


class TestCosineEuclidean:
    def test_cosine_zero_vector_scores_one(self, rng):
        q = feature_matrix(np.vstack([np.zeros(8), rng.standard_normal(8)]))
        r = feature_matrix(rng.standard_normal((3, 8)))
        v = distance_matrix(q, r, "cosine").values
        assert np.all(v[0] == 1.0)

    def test_cosine_landmarks(self):
        q = feature_matrix(np.array([[1.0, 0.0]]))
        r = feature_matrix(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(distance_matrix(q, r, "cosine").values[0],
                                   [0.0, 1.0, 2.0], atol=1e-12)

    def test_cosine_stays_in_range(self, rng):
        q = feature_matrix(rng.standard_normal((25, 5)))
        r = feature_matrix(rng.standard_normal((25, 5)))
        v = distance_matrix(q, r, "cosine").values
        assert v.min() >= 0.0 and v.max() <= 2.0

    def test_euclidean_matches_norm_oracle(self, rng):
        fq = feature_matrix(rng.standard_normal((9, 7)))
        fr = feature_matrix(rng.standard_normal((11, 7)))
        got = distance_matrix(fq, fr, "euclidean").values
        want = np.array([[np.linalg.norm(np.float64(a) - np.float64(b))
                          for b in fr.data] for a in fq.data])
        np.testing.assert_allclose(got, want, rtol=1e-9)


class TestContracts:
    @pytest.mark.parametrize("metric", ["canberra", "cosine", "euclidean"])
    def test_transpose_symmetry_is_bitwise(self, metric, rng):
        a = feature_matrix(rng.standard_normal((13, 6)))
        b = feature_matrix(rng.standard_normal((21, 6)))
        ab = distance_matrix(a, b, metric).values
        ba = distance_matrix(b, a, metric).values
        assert np.array_equal(ab.T, ba)

    def test_all_entries_finite_nonnegative(self, rng):
        q, r = planted_pair(rng, n=10, m=40, dim=8, offsets=(15,))
        for metric in ("canberra", "cosine", "euclidean"):
            v = distance_matrix(q, r, metric).values
            assert np.isfinite(v).all() and (v >= 0).all()

    def test_dim_mismatch_rejected(self, rng):
        q = feature_matrix(rng.standard_normal((4, 5)))
        r = feature_matrix(rng.standard_normal((4, 6)))
        with pytest.raises(DimensionMismatchError, match="5 != .*6"):
            distance_matrix(q, r)

    def test_empty_rejected(self, rng):
        q = feature_matrix(np.empty((0, 5)))
        r = feature_matrix(rng.standard_normal((4, 5)))
        with pytest.raises(InputDataError, match="empty"):
            distance_matrix(q, r)

    def test_unknown_metric_rejected(self, rng):
        q = feature_matrix(rng.standard_normal((2, 2)))
        with pytest.raises(InputDataError, match="manhattan"):
            distance_matrix(q, q, "manhattan")


class TestRender:
    def test_constant_matrix_renders_black(self):
        dm = DistanceMatrix(np.full((3, 4), 7.5), "canberra")
        img = render_image(dm)
        assert img.pixels.dtype == np.uint8
        assert np.all(img.pixels == 0)

    def test_two_level_matrix_hits_both_extremes(self):
        dm = DistanceMatrix(np.array([[0.0, 10.0]]), "canberra")
        np.testing.assert_array_equal(render_image(dm).pixels, [[0, 255]])

    def test_half_up_rounding(self):
        # midpoint 1 of {0,1,2} maps to floor(127.5 + 0.5) = 128
        dm = DistanceMatrix(np.array([[0.0, 1.0, 2.0]]), "canberra")
        np.testing.assert_array_equal(render_image(dm).pixels, [[0, 128, 255]])

    def test_planted_copy_diagonal_is_black(self, rng):
        q, r = planted_pair(rng, n=12, m=60, dim=10, offsets=(20,))
        img = render_image(distance_matrix(q, r, "canberra"))
        diag = img.pixels[np.arange(12), 20 + np.arange(12)]
        assert np.all(diag == 0)

    def test_rendering_is_monotone(self, rng):
        v = rng.uniform(0, 30, (9, 9))
        px = render_image(DistanceMatrix(v, "canberra")).pixels
        order = np.argsort(v, axis=None)
        flat = px.flatten()[order]
        assert np.all(np.diff(flat.astype(np.int16)) >= 0)


class TestPgm:
    def test_header_layout_exact(self, tmp_path):
        img = render_image(DistanceMatrix(np.arange(6, dtype=float).reshape(2, 3), "x"))
        p = tmp_path / "img.pgm"
        write_pgm(img, p)
        raw = p.read_bytes()
        assert raw.startswith(b"P5\n3 2\n255\n")
        assert len(raw) == len(b"P5\n3 2\n255\n") + 6

    def test_single_pixel_payload(self, tmp_path):
        from qbestd.distance import DistanceImage
        p = tmp_path / "one.pgm"
        write_pgm(DistanceImage(np.array([[7]], dtype=np.uint8)), p)
        assert p.read_bytes() == b"P5\n1 1\n255\n\x07"

    def test_round_trip(self, tmp_path, rng):
        from qbestd.distance import DistanceImage
        img = DistanceImage(rng.integers(0, 256, (5, 9)).astype(np.uint8))
        p = tmp_path / "rt.pgm"
        write_pgm(img, p)
        np.testing.assert_array_equal(read_pgm(p).pixels, img.pixels)
