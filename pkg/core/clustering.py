"""Complete-link clustering of hash codes and cluster quality measures."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from core.errors import ConfigurationError, EvaluationError
from core.model import codes_to_dense, top_k_rows

logger = logging.getLogger(__name__)


def cosine_distances(codes: np.ndarray) -> np.ndarray:
    """Square matrix of pairwise cosine distances; zero vectors are rejected."""
    X = np.asarray(codes, dtype=np.float64)
    if X.ndim != 2:
        raise EvaluationError("codes must be a 2-D array")
    if np.any(~X.any(axis=1)):
        raise EvaluationError("zero vector in input: cosine distance undefined")
    if len(X) == 1:
        return np.zeros((1, 1))
    return squareform(pdist(X, metric="cosine"))


def agglomerative_cluster(codes: np.ndarray, C: int) -> np.ndarray:
    """Complete-link merging on cosine distance until C clusters remain.

    A cluster is identified by its smallest member index. Among equally close
    pairs the lexicographically smallest (id_a, id_b) merges first. Returned
    labels are 0..C-1, numbered by the clusters' smallest member.
    """
    D = cosine_distances(codes)
    n = len(D)
    if not 1 <= C <= n:
        raise ConfigurationError(f"cluster count must be in [1, {n}], got {C}")
    D = D.copy()
    np.fill_diagonal(D, np.inf)
    slot = np.arange(n)
    for _ in range(n - C):
        flat = int(np.argmin(D))
        a, b = divmod(flat, n)
        a, b = min(a, b), max(a, b)
        merged = np.maximum(D[a], D[b])
        D[a, :] = merged
        D[:, a] = merged
        D[a, a] = np.inf
        D[b, :] = np.inf
        D[:, b] = np.inf
        slot[slot == b] = a
    roots = np.unique(slot)
    return np.searchsorted(roots, slot)


@dataclass
class ClusterQuality:
    """Intra- and nearest inter-cluster cosine similarity per cluster."""

    intra: np.ndarray
    inter: np.ndarray

    @property
    def intra_mean(self) -> float:
        return float(self.intra.mean())

    @property
    def intra_std(self) -> float:
        return float(self.intra.std())

    @property
    def inter_mean(self) -> float:
        return float(self.inter.mean())

    @property
    def inter_std(self) -> float:
        return float(self.inter.std())

    def summary(self) -> dict:
        return {
            "clusters": len(self.intra),
            "intra_mean": self.intra_mean,
            "intra_std": self.intra_std,
            "inter_mean": self.inter_mean,
            "inter_std": self.inter_std,
        }


def cluster_quality(codes: np.ndarray, assignment: np.ndarray) -> ClusterQuality:
    """Per cluster: mean pairwise similarity inside it (1.0 for singletons) and the
    maximum similarity from one of its points to a point of another cluster
    (0.0 when there is no other cluster)."""
    S = 1.0 - cosine_distances(codes)
    labels = np.asarray(assignment)
    if len(labels) != len(S):
        raise EvaluationError("assignment length differs from number of codes")
    clusters = np.unique(labels)
    intra = np.empty(len(clusters))
    inter = np.empty(len(clusters))
    for c_i, c in enumerate(clusters):
        inside = labels == c
        m = int(inside.sum())
        if m == 1:
            intra[c_i] = 1.0
        else:
            block = S[np.ix_(inside, inside)]
            intra[c_i] = (block.sum() - np.trace(block)) / (m * (m - 1))
        outside = ~inside
        inter[c_i] = S[np.ix_(inside, outside)].max() if outside.any() else 0.0
    return ClusterQuality(intra, inter)


def binarize_topk(vectors: np.ndarray, k: int) -> np.ndarray:
    """Naive discretization: the k largest entries of each row become 1."""
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise ConfigurationError("vectors must be a 2-D array")
    if not 1 <= k <= X.shape[1]:
        raise ConfigurationError(f"k must be in [1, {X.shape[1]}], got {k}")
    return codes_to_dense(top_k_rows(X, k), X.shape[1])
