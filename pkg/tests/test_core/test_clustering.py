"""Tests for core/clustering.py - complete-link clustering and cluster quality."""

import numpy as np
import pytest


def _complete_link_oracle(D, C):
    """Exhaustive merging: recompute every cluster distance from scratch each step."""
    clusters = [[i] for i in range(len(D))]
    while len(clusters) > C:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                dist = max(D[i, j] for i in clusters[a] for j in clusters[b])
                key = (dist, min(clusters[a]), min(clusters[b]))
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        clusters[a] = sorted(clusters[a] + clusters[b])
        del clusters[b]
    labels = np.empty(len(D), dtype=int)
    for label, members in enumerate(sorted(clusters, key=min)):
        labels[members] = label
    return labels


def _random_codes(rng, n, K, k):
    codes = np.zeros((n, K), dtype=np.uint8)
    for row in codes:
        row[rng.choice(K, size=k, replace=False)] = 1
    return codes


class TestAgglomerativeCluster:
    """Tests for agglomerative_cluster."""

    def test_matches_exhaustive_merging(self):
        """100 random code sets of up to 8 points, every cluster count."""
        from core.clustering import agglomerative_cluster, cosine_distances

        rng = np.random.default_rng(12)
        for _ in range(100):
            n = int(rng.integers(1, 9))
            K = int(rng.integers(3, 9))
            codes = _random_codes(rng, n, K, int(rng.integers(1, K)))
            D = cosine_distances(codes)
            for C in range(1, n + 1):
                expected = _complete_link_oracle(D, C)
                np.testing.assert_array_equal(agglomerative_cluster(codes, C), expected)

    def test_obvious_groups(self):
        """Two tight groups separate at C = 2."""
        from core.clustering import agglomerative_cluster

        codes = np.array(
            [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1], [1, 1, 1, 0]], dtype=np.uint8
        )
        assert agglomerative_cluster(codes, 2).tolist() == [0, 0, 1, 1, 0]

    def test_extremes(self):
        """C = n keeps singletons, C = 1 merges everything."""
        from core.clustering import agglomerative_cluster

        codes = _random_codes(np.random.default_rng(0), 6, 8, 3)
        assert agglomerative_cluster(codes, 6).tolist() == list(range(6))
        assert agglomerative_cluster(codes, 1).tolist() == [0] * 6

    @pytest.mark.parametrize("C", [0, 4])
    def test_cluster_count_out_of_range(self, C):
        from core.clustering import agglomerative_cluster
        from core.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            agglomerative_cluster(np.eye(3), C)

    def test_zero_vector_rejected(self):
        from core.clustering import agglomerative_cluster
        from core.errors import EvaluationError

        with pytest.raises(EvaluationError):
            agglomerative_cluster(np.array([[1, 0], [0, 0]]), 1)


class TestClusterQuality:
    """Tests for cluster_quality and binarize_topk."""

    def test_hand_computed(self):
        """Intra is the mean pairwise similarity, inter the closest outside point."""
        from core.clustering import cluster_quality

        codes = np.array([[1, 1, 0, 0], [1, 0, 1, 0], [0, 0, 1, 1]], dtype=np.uint8)
        quality = cluster_quality(codes, np.array([0, 0, 1]))
        np.testing.assert_allclose(quality.intra, [0.5, 1.0])
        np.testing.assert_allclose(quality.inter, [0.5, 0.5])
        assert quality.summary()["clusters"] == 2

    def test_single_cluster(self):
        """With one cluster there is nothing outside it."""
        from core.clustering import cluster_quality

        quality = cluster_quality(np.eye(3), np.zeros(3, dtype=int))
        assert quality.inter.tolist() == [0.0]
        assert quality.intra_mean == pytest.approx(0.0)

    def test_assignment_length(self):
        from core.clustering import cluster_quality
        from core.errors import EvaluationError

        with pytest.raises(EvaluationError):
            cluster_quality(np.eye(3), np.array([0, 1]))

    def test_binarize_topk(self):
        """The k largest entries of each row become ones."""
        from core.clustering import binarize_topk

        vectors = np.array([[0.1, -2.0, 3.0, 0.5], [1.0, 1.0, 0.0, -1.0]])
        assert binarize_topk(vectors, 2).tolist() == [[0, 0, 1, 1], [1, 1, 0, 0]]

    def test_binarize_topk_bad_k(self):
        from core.clustering import binarize_topk
        from core.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            binarize_topk(np.ones((2, 3)), 4)

    @pytest.mark.slow
    def test_trained_clusters_are_tighter_inside(self):
        """On a synthetic-topic model, 20 clusters are more similar inside than across."""
        from core.clustering import agglomerative_cluster, cluster_quality
        from core.model import codes_to_dense, static_embeddings
        from core.synthetic import two_topic_corpus
        from core.trainer import TrainingConfig, train

        lines, _ = two_topic_corpus(20000, seed=4)
        cfg = TrainingConfig(K=100, w=9, n_voc=100, epochs=3, lr0=2e-4, batch_size=1000)
        model, _ = train(lines, cfg)
        codes = codes_to_dense(static_embeddings(model.weights, 16), model.K)
        quality = cluster_quality(codes, agglomerative_cluster(codes, 20))
        assert quality.intra_mean > quality.inter_mean
