import numpy as np
import pytest
from sklearn.manifold import trustworthiness

from soundzones.embeddings import EMBED_DIM, ContrastiveMatrix, zscore_columns
from soundzones.geometry import pairwise_sq_dists
from soundzones.tsne import (
    ProjectionError,
    calibrate_affinities,
    joint_affinities,
    kl_divergence,
    tsne,
    _student_t_q,
)

from oracles import affinity_row_bisection

from test_cluster import blob_matrix


class TestCalibrateAffinities:
    def test_equidistant_points_give_uniform_rows(self):
        n = 21
        d2 = np.full((n, n), 2.0)
        np.fill_diagonal(d2, 0.0)
        p = calibrate_affinities(d2, perplexity=20.0)
        off_diag = p[~np.eye(n, dtype=bool)]
        assert np.all(off_diag == 1.0 / 20.0)
        assert np.all(np.diagonal(p) == 0.0)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(12, 6))
        p = calibrate_affinities(pairwise_sq_dists(pts), perplexity=5.0)
        assert np.abs(p.sum(axis=1) - 1.0).max() < 1e-9

    def test_achieves_target_perplexity(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(30, 8))
        p = calibrate_affinities(pairwise_sq_dists(pts), perplexity=10.0)
        entropy = -(p * np.log2(np.maximum(p, 1e-300))).sum(axis=1)
        assert np.abs(2.0**entropy - 10.0).max() <= 1e-4

    def test_three_point_row_matches_high_precision_oracle(self):
        pts = np.array([[0.0], [1.0], [3.0]])
        d2 = pairwise_sq_dists(pts)
        p = calibrate_affinities(d2, perplexity=1.5)
        for i in range(3):
            expected = affinity_row_bisection(d2[i][np.arange(3) != i], 1.5)
            actual = p[i][np.arange(3) != i]
            assert np.abs(actual - expected).max() < 1e-6

    def test_unreachable_perplexity_names_row(self):
        # two ties at the minimum distance floor the achievable 2^H at 2
        d2 = np.array(
            [
                [0.0, 1.0, 1.0, 25.0],
                [1.0, 0.0, 4.0, 25.0],
                [1.0, 4.0, 0.0, 25.0],
                [25.0, 25.0, 25.0, 0.0],
            ]
        )
        with pytest.raises(ValueError, match="row 0.*unreachable"):
            calibrate_affinities(d2, perplexity=1.5)

    def test_input_validation(self):
        with pytest.raises(ValueError, match="3 points"):
            calibrate_affinities(np.zeros((2, 2)), perplexity=1.2)
        d2 = np.full((5, 5), 1.0)
        np.fill_diagonal(d2, 0.0)
        with pytest.raises(ValueError, match="perplexity"):
            calibrate_affinities(d2, perplexity=1.0)
        with pytest.raises(ValueError, match="perplexity"):
            calibrate_affinities(d2, perplexity=4.5)
        bad = d2.copy()
        bad[0, 0] = 0.5
        with pytest.raises(ValueError, match="diagonal"):
            calibrate_affinities(bad, perplexity=2.0)

    def test_translation_leaves_affinities_unchanged(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(10, 5))
        shifted = pts + np.full(5, 37.25)
        p1 = calibrate_affinities(pairwise_sq_dists(pts), perplexity=4.0)
        p2 = calibrate_affinities(pairwise_sq_dists(shifted), perplexity=4.0)
        assert np.abs(p1 - p2).max() < 1e-8


class TestJointAffinities:
    def test_symmetric_zero_diagonal_unit_sum(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(14, 4))
        p = joint_affinities(calibrate_affinities(pairwise_sq_dists(pts), perplexity=6.0))
        assert abs(p.sum() - 1.0) < 1e-9
        assert np.array_equal(p, p.T)
        assert np.all(np.diagonal(p) == 0.0)

    def test_student_t_is_proper_distribution(self):
        rng = np.random.default_rng(4)
        q, _ = _student_t_q(rng.normal(size=(9, 2)))
        assert abs(q.sum() - 1.0) < 1e-9
        assert np.all(q >= 0.0)


class TestTsne:
    def test_output_shape_and_finiteness(self):
        m, _ = blob_matrix(12, 3, seed=0)
        result = tsne(m, perplexity=4.0, seed=0, iters=300)
        assert result.coords.shape == (12, 2)
        assert np.isfinite(result.coords).all()
        assert result.countries == m.countries

    def test_optimization_reduces_kl(self):
        m, _ = blob_matrix(12, 3, seed=5)
        result = tsne(m, perplexity=4.0, seed=1, iters=400)
        assert result.final_kl >= 0.0
        assert result.final_kl < result.initial_kl

    def test_same_seed_bit_identical(self):
        m, _ = blob_matrix(10, 2, seed=6)
        a = tsne(m, perplexity=3.0, seed=9, iters=200)
        b = tsne(m, perplexity=3.0, seed=9, iters=200)
        assert a == b

    def test_different_seed_changes_coords(self):
        m, _ = blob_matrix(10, 2, seed=6)
        a = tsne(m, perplexity=3.0, seed=1, iters=150)
        b = tsne(m, perplexity=3.0, seed=2, iters=150)
        assert not np.array_equal(a.coords, b.coords)

    def test_planted_blobs_preserve_neighborhoods(self):
        m, _ = blob_matrix(62, 9, seed=42)
        result = tsne(m, perplexity=20.0, seed=3)
        score = trustworthiness(m.values, result.coords, n_neighbors=5)
        assert score >= 0.95

    def test_pca_init_supported_and_deterministic(self):
        m, _ = blob_matrix(12, 3, seed=8)
        a = tsne(m, perplexity=4.0, seed=4, iters=200, init="pca")
        b = tsne(m, perplexity=4.0, seed=4, iters=200, init="pca")
        assert a == b

    def test_nonfinite_gradient_reports_iteration(self):
        m, _ = blob_matrix(8, 2, seed=9)
        with pytest.raises(ProjectionError, match="iteration"):
            tsne(m, perplexity=3.0, seed=0, iters=50, learning_rate=1e160)

    def test_input_validation(self):
        m, _ = blob_matrix(8, 2, seed=10)
        with pytest.raises(ValueError, match="perplexity"):
            tsne(m, perplexity=8.0, seed=0)
        small = ContrastiveMatrix(
            ("A", "B", "C", "D"),
            zscore_columns(np.random.default_rng(0).normal(size=(4, EMBED_DIM))),
            standardized=True,
        )
        with pytest.raises(ValueError, match="5 rows"):
            tsne(small, perplexity=2.0, seed=0)
        with pytest.raises(ValueError, match="init"):
            tsne(m, perplexity=3.0, seed=0, init="umap")

    def test_kl_divergence_nonnegative(self):
        m, _ = blob_matrix(10, 2, seed=11)
        p = joint_affinities(calibrate_affinities(pairwise_sq_dists(m.values), 4.0))
        rng = np.random.default_rng(12)
        for _ in range(5):
            assert kl_divergence(p, rng.normal(size=(10, 2))) >= 0.0
