import numpy as np
import pytest

from squadmds.errors import DimensionMismatch, RowCountMismatch
from squadmds.linalg import seeded_rng
from squadmds.quality import (
    auc_log_k,
    knn_sets,
    qnx_curve,
    quality_curve,
    rnx_curve,
    rnx_from_q,
    write_curve,
)


def naive_knn(points, k):
    """Full sort of (distance, index) pairs for every point."""
    n = len(points)
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        d = [(float(np.sum((points[i] - points[j]) ** 2)), j) for j in range(n) if j != i]
        out[i] = [j for _, j in sorted(d)[:k]]
    return out


def naive_qnx(hd, ld):
    n = len(hd)
    a, b = naive_knn(hd, n - 1), naive_knn(ld, n - 1)
    return np.array([
        sum(len(set(a[i, :k]) & set(b[i, :k])) for i in range(n)) / (n * k)
        for k in range(1, n - 1)
    ])


class TestKnn:
    def test_collinear(self):
        pts = np.array([[0.0], [1.0], [3.0]])
        nbrs = knn_sets(pts, 2)
        assert nbrs[1, 0] == 0
        np.testing.assert_array_equal(nbrs, [[1, 2], [0, 2], [1, 0]])

    def test_ties_by_index(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
        nbrs = knn_sets(pts, 4)
        np.testing.assert_array_equal(nbrs[0], [1, 2, 3, 4])
        np.testing.assert_array_equal(nbrs[2], [1, 3, 0, 4])

    def test_naive_oracle(self):
        pts = seeded_rng(0).standard_normal((100, 3))
        np.testing.assert_array_equal(knn_sets(pts, 99), naive_knn(pts, 99))

    def test_excludes_self_even_with_duplicates(self):
        pts = np.zeros((5, 2))
        nbrs = knn_sets(pts, 4)
        for i in range(5):
            assert i not in nbrs[i]

    def test_workers_agree(self):
        pts = seeded_rng(1).standard_normal((150, 4))
        np.testing.assert_array_equal(knn_sets(pts, 20, workers=1), knn_sets(pts, 20, workers=3))

    def test_bad_k(self):
        with pytest.raises(ValueError):
            knn_sets(np.zeros((5, 2)), 5)


class TestCurves:
    def test_identity(self):
        pts = seeded_rng(0).standard_normal((50, 3))
        c = quality_curve(pts, pts)
        np.testing.assert_array_equal(c.q_nx, 1.0)
        np.testing.assert_allclose(c.r_nx, 1.0, rtol=1e-15)
        assert c.auc == pytest.approx(1.0, abs=1e-15)

    def test_matches_naive(self):
        rng = seeded_rng(2)
        hd, ld = rng.standard_normal((40, 5)), rng.standard_normal((40, 2))
        c = quality_curve(hd, ld)
        np.testing.assert_allclose(c.q_nx, naive_qnx(hd, ld), rtol=0, atol=1e-15)
        np.testing.assert_array_equal(c.k_values, np.arange(1, 39))

    def test_four_points_reversed(self):
        # HD order along a line; LD reverses the middle pair
        hd = np.array([[0.0], [1.0], [3.0], [7.0]])
        ld = np.array([[0.0, 0.0], [3.0, 0.0], [1.0, 0.0], [7.0, 0.0]])
        c = quality_curve(hd, ld)
        np.testing.assert_allclose(c.q_nx, naive_qnx(hd, ld))
        # K=1: point 0 -> 1 vs 2; point 1 -> 0 vs 2; point 2 -> 1 vs 0; point 3 -> 2 vs 1
        assert c.q_nx[0] == 0.0

    def test_qnx_from_lists(self):
        rng = seeded_rng(3)
        hd, ld = rng.standard_normal((30, 4)), rng.standard_normal((30, 2))
        q = qnx_curve(knn_sets(hd, 28), knn_sets(ld, 28))
        np.testing.assert_allclose(q, quality_curve(hd, ld).q_nx, rtol=1e-15)

    def test_qnx_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            qnx_curve(np.zeros((5, 3), dtype=int), np.zeros((5, 2), dtype=int))

    def test_chunking_is_invisible(self, monkeypatch):
        from squadmds import quality

        rng = seeded_rng(4)
        hd, ld = rng.standard_normal((60, 4)), rng.standard_normal((60, 2))
        whole = quality_curve(hd, ld)
        monkeypatch.setattr(quality, "CHUNK_ELEMENTS", 7 * 60)
        parts = quality_curve(hd, ld)
        np.testing.assert_array_equal(whole.q_nx, parts.q_nx)

    def test_invariant_to_ld_similarity(self):
        rng = seeded_rng(5)
        hd, ld = rng.standard_normal((60, 4)), rng.standard_normal((60, 2))
        base = quality_curve(hd, ld)
        for c in (0.1, 7.0, 1000.0):
            moved = quality_curve(hd, c * ld)
            np.testing.assert_array_equal(moved.q_nx, base.q_nx)
            assert moved.auc == base.auc

    def test_permutation_equivariant(self):
        rng = seeded_rng(6)
        hd, ld = rng.standard_normal((50, 4)), rng.standard_normal((50, 2))
        perm = rng.permutation(50)
        np.testing.assert_allclose(quality_curve(hd[perm], ld[perm]).q_nx, quality_curve(hd, ld).q_nx)

    def test_row_mismatch(self):
        with pytest.raises(RowCountMismatch):
            quality_curve(np.zeros((10, 3)), np.zeros((9, 2)))

    def test_mean_rnx(self):
        pts = seeded_rng(0).standard_normal((20, 3))
        c = quality_curve(pts, pts)
        assert c.mean_rnx(1, 100) == pytest.approx(1.0)


class TestRnxAuc:
    def test_perfect(self):
        n = 12
        np.testing.assert_allclose(rnx_curve(np.ones(n - 2)), 1.0)

    def test_random_level(self):
        n = 12
        k = np.arange(1, n - 1)
        np.testing.assert_allclose(rnx_curve(k / (n - 1)), 0.0, atol=1e-15)

    def test_hand_value(self):
        # N = 5, K = 2, Q = 0.75
        r = rnx_from_q(np.array([0.5, 0.75]), 5)
        assert r[1] == pytest.approx(0.5)

    def test_k_range(self):
        with pytest.raises(ValueError):
            rnx_from_q(np.ones(4), 5)

    def test_auc_constants(self):
        assert auc_log_k(np.ones(30)) == pytest.approx(1.0)
        assert auc_log_k(np.zeros(30)) == 0.0

    def test_auc_two_terms(self):
        assert auc_log_k(np.array([1.0, 0.0])) == pytest.approx(2.0 / 3.0, rel=1e-15)


def test_write_curve(tmp_path):
    pts = seeded_rng(0).standard_normal((10, 3))
    c = quality_curve(pts, pts[:, :2])
    path = tmp_path / "curve.tsv"
    write_curve(path, c)
    lines = path.read_text().splitlines()
    assert lines[0] == "K\tQ_NX\tR_NX"
    assert len(lines) == 1 + 8 + 1
    k, q, r = lines[1].split("\t")
    assert int(k) == 1 and float(q) == c.q_nx[0] and float(r) == c.r_nx[0]
    assert lines[-1].startswith("# kind:summary\tauc:")
    assert float(lines[-1].split("auc:")[1].split("\t")[0]) == c.auc
