"""Kenyon-cell layer: weights, activations, energy, updates and bio-hashing.

W has K rows (one per Kenyon cell) and 2 * N_voc columns (context block, then
target block). Weights are stored as float32; every reduction over them is
accumulated in float64.
"""

import logging
import struct
import zlib
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.special import softmax

from core.corpus import PRNG_ID, EncodedSample, SampleSet, Vocabulary, WGram, encode_wgram
from core.errors import (
    BadMagicError,
    ChecksumError,
    ConfigurationError,
    DegenerateUnitError,
    DimensionMismatchError,
    IdOutOfRangeError,
    ModelFormatError,
    TruncatedFileError,
    VersionMismatchError,
)

logger = logging.getLogger(__name__)

INIT_STREAM = 0

MODEL_MAGIC = b"FLYW"
MODEL_VERSION = 1
_HEADER = struct.Struct("<4sIIIIQII")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")

BLOCKS = ("context", "target")


# === Construction ===


def init_weights(K: int, n_voc: int, seed: int, dtype=np.float32) -> np.ndarray:
    """Gaussian rows scaled to unit Euclidean norm, deterministic in seed."""
    if K < 1 or n_voc < 1:
        raise ConfigurationError(f"K and n_voc must be >= 1, got K={K}, n_voc={n_voc}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(INIT_STREAM,))))
    W = rng.standard_normal((K, 2 * n_voc))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    return W.astype(dtype)


def _check_indices(W: np.ndarray, indices: np.ndarray) -> None:
    if len(indices) and (indices.min() < 0 or indices.max() >= W.shape[1]):
        raise IdOutOfRangeError(f"input index out of range for {W.shape[1]} inputs")


# === Activations and winners ===


def activations(W: np.ndarray, s: EncodedSample) -> np.ndarray:
    """Input current of every unit: sum of W[mu, i] over the active inputs i."""
    idx = np.asarray(s.active_indices, dtype=np.int64)
    _check_indices(W, idx)
    if len(idx) == 0:
        return np.zeros(W.shape[0], dtype=np.float64)
    return W[:, idx].astype(np.float64).sum(axis=1)


def transposed64(W: np.ndarray) -> np.ndarray:
    """Contiguous float64 copy of W.T, the right operand of batched products."""
    return np.ascontiguousarray(W.T, dtype=np.float64)


def batch_activations(X: sparse.csr_matrix, WT64: np.ndarray) -> np.ndarray:
    """Activations of a batch of binary samples (rows of X); shape (batch, K)."""
    return np.asarray(X @ WT64)


def winner(acts: np.ndarray) -> int:
    """Index of the maximal activation; the smallest index wins ties."""
    return int(np.argmax(acts))


# === Energy ===


def _as_csr(samples, n_inputs: int) -> sparse.csr_matrix:
    if isinstance(samples, SampleSet):
        return samples.rows(np.arange(len(samples)))
    samples = list(samples)
    lengths = [len(s) for s in samples]
    indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    if samples:
        indices = np.concatenate([np.asarray(s.active_indices, dtype=np.int64) for s in samples])
    else:
        indices = np.zeros(0, dtype=np.int64)
    if len(indices) and (indices.min() < 0 or indices.max() >= n_inputs):
        raise IdOutOfRangeError(f"input index out of range for {n_inputs} inputs")
    data = np.ones(len(indices), dtype=np.float64)
    return sparse.csr_matrix((data, indices, indptr), shape=(len(samples), n_inputs))


def energy_terms(W: np.ndarray, X: sparse.csr_matrix, p: np.ndarray) -> np.ndarray:
    """Per-sample energy -<W_win, v/p> / |W_win| with the winner chosen without p."""
    n = X.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    W64 = W.astype(np.float64)
    mu = np.argmax(np.asarray(X @ W64.T), axis=1)
    norms = np.sqrt(np.einsum("ij,ij->i", W64, W64))
    if np.any(norms[mu] == 0.0):
        unit = int(mu[np.flatnonzero(norms[mu] == 0.0)[0]])
        raise DegenerateUnitError(f"degenerate unit {unit}: zero weight row won a sample")
    owner = np.repeat(np.arange(n), np.diff(X.indptr))
    weighted = W64[mu[owner], X.indices] / p[X.indices]
    numerators = np.bincount(owner, weights=weighted, minlength=n)
    return -numerators / norms[mu]


def energy(W: np.ndarray, samples: Sequence[EncodedSample] | SampleSet, p: np.ndarray) -> float:
    """Total energy of a set of samples; zero for an empty set."""
    X = _as_csr(samples, W.shape[1])
    return float(energy_terms(W, X, p).sum())


# === Learning rule ===


@dataclass
class UnitDelta:
    """Update of a single row: sparse part minus a multiple of the current row."""

    unit: int
    indices: np.ndarray
    values: np.ndarray
    row_coefficient: float

    def row(self, W: np.ndarray) -> np.ndarray:
        """Dense delta of the winning row, in float64."""
        delta = -self.row_coefficient * W[self.unit].astype(np.float64)
        delta[self.indices] += self.values
        return delta

    def dense(self, W: np.ndarray) -> np.ndarray:
        """Full-matrix delta; every row other than the winner is zero."""
        full = np.zeros(W.shape, dtype=np.float64)
        full[self.unit] = self.row(W)
        return full


def update_delta(W: np.ndarray, s: EncodedSample, p: np.ndarray, eps: float) -> UnitDelta:
    """Single-sample learning rule for the winning unit.

    dW[win, i] = eps * (v_i / p_i - (sum_j W[win, j] v_j / p_j) * W[win, i])
    """
    if eps <= 0:
        raise ConfigurationError(f"learning rate must be > 0, got {eps}")
    idx = np.asarray(s.active_indices, dtype=np.int64)
    mu = winner(activations(W, s))
    inv_p = 1.0 / p[idx]
    inner = float(np.dot(W[mu, idx].astype(np.float64), inv_p))
    return UnitDelta(mu, idx, eps * inv_p, eps * inner)


# === Bio-hashing ===


@dataclass(frozen=True)
class HashCode:
    """The k most activated units out of n_units."""

    active_units: np.ndarray
    n_units: int

    @property
    def k(self) -> int:
        return len(self.active_units)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.n_units, dtype=np.uint8)
        dense[self.active_units] = 1
        return dense

    def __eq__(self, other) -> bool:
        if not isinstance(other, HashCode):
            return NotImplemented
        return self.n_units == other.n_units and np.array_equal(
            self.active_units, other.active_units
        )

    def __hash__(self) -> int:
        return hash((self.n_units, self.active_units.tobytes()))


def check_hash_length(k: int, K: int) -> None:
    if not 1 <= k <= K:
        raise ConfigurationError(f"hash length k must be in [1, {K}], got {k}")


def top_k_units(acts: np.ndarray, k: int) -> np.ndarray:
    """Sorted indices of the k largest activations; ties go to smaller indices."""
    check_hash_length(k, len(acts))
    return np.sort(np.argsort(-acts, kind="stable")[:k])


def top_k_rows(acts: np.ndarray, k: int) -> np.ndarray:
    """Row-wise top_k_units for a (n, K) activation matrix."""
    check_hash_length(k, acts.shape[1])
    return np.sort(np.argsort(-acts, axis=1, kind="stable")[:, :k], axis=1)


def bio_hash(W: np.ndarray, s: EncodedSample, k: int) -> HashCode:
    return HashCode(top_k_units(activations(W, s), k), W.shape[0])


def static_embedding(W: np.ndarray, word_id: int, k: int) -> HashCode:
    """Hash of a sample with an empty context block and one-hot target word."""
    n_voc = W.shape[1] // 2
    if not 0 <= word_id < n_voc:
        raise IdOutOfRangeError(f"word id {word_id} out of range for vocabulary of size {n_voc}")
    acts = W[:, n_voc + word_id].astype(np.float64)
    return HashCode(top_k_units(acts, k), W.shape[0])


def static_embeddings(W: np.ndarray, k: int) -> np.ndarray:
    """Active units of every word's static hash; shape (N_voc, k)."""
    n_voc = W.shape[1] // 2
    return top_k_rows(W[:, n_voc:].T.astype(np.float64), k)


def context_embedding(W: np.ndarray, g: WGram, k: int) -> HashCode:
    return bio_hash(W, encode_wgram(g, W.shape[1] // 2), k)


def codes_to_dense(units: np.ndarray, K: int) -> np.ndarray:
    """(n, k) active-unit rows to a (n, K) binary matrix."""
    dense = np.zeros((len(units), K), dtype=np.uint8)
    np.put_along_axis(dense, units, 1, axis=1)
    return dense


# === Probing ===


def kc_word_distribution(W: np.ndarray, mu: int, block: str = "target") -> np.ndarray:
    """Softmax over one block of unit mu's weights: a word distribution of length N_voc."""
    if not 0 <= mu < W.shape[0]:
        raise IdOutOfRangeError(f"unit {mu} out of range for K={W.shape[0]}")
    if block not in BLOCKS:
        raise ConfigurationError(f"block must be one of {BLOCKS}, got {block!r}")
    n_voc = W.shape[1] // 2
    start = n_voc if block == "target" else 0
    return softmax(W[mu, start : start + n_voc].astype(np.float64))


# === Persistence ===


@dataclass
class FlyModel:
    """Trained weights together with their vocabulary and provenance."""

    weights: np.ndarray
    vocab: Vocabulary
    w: int
    seed: int
    epochs_trained: int = 0
    prng_id: int = PRNG_ID

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        if self.weights.ndim != 2 or self.weights.shape[1] != 2 * self.vocab.n_voc:
            raise DimensionMismatchError(
                f"weights {self.weights.shape} do not match vocabulary of size {self.vocab.n_voc}"
            )

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @property
    def n_voc(self) -> int:
        return self.vocab.n_voc

    def __eq__(self, other) -> bool:
        if not isinstance(other, FlyModel):
            return NotImplemented
        return (
            (self.w, self.seed, self.epochs_trained, self.prng_id)
            == (other.w, other.seed, other.epochs_trained, other.prng_id)
            and self.vocab == other.vocab
            and self.weights.tobytes() == other.weights.tobytes()
        )

    def save(self, path: Path | str) -> None:
        Path(path).write_bytes(save_model(self))
        logger.info("saved model K=%d N_voc=%d to %s", self.K, self.n_voc, path)

    @classmethod
    def load(cls, path: Path | str) -> "FlyModel":
        return load_model(Path(path).read_bytes())


def save_model(model: FlyModel) -> bytes:
    """Serialize header, float32 weights, vocabulary and a trailing CRC32."""
    parts = [
        _HEADER.pack(
            MODEL_MAGIC,
            MODEL_VERSION,
            model.K,
            model.n_voc,
            model.w,
            model.seed,
            model.epochs_trained,
            model.prng_id,
        ),
        model.weights.astype("<f4").tobytes(),
        _U32.pack(model.n_voc),
    ]
    for token, count in zip(model.vocab.tokens, model.vocab.counts, strict=True):
        raw = token.encode("utf-8")
        parts.append(_U32.pack(len(raw)))
        parts.append(raw)
        parts.append(_U64.pack(int(count)))
    payload = b"".join(parts)
    return payload + _U32.pack(zlib.crc32(payload))


def _take(data: bytes, pos: int, size: int, what: str) -> int:
    if pos + size > len(data):
        raise TruncatedFileError(f"truncated model file while reading {what}")
    return pos + size


def load_model(data: bytes) -> FlyModel:
    """Parse a FLYW file; the checksum is verified before the vocabulary is decoded."""
    if len(data) < 4:
        raise TruncatedFileError("truncated model file while reading magic")
    if data[:4] != MODEL_MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    pos = _take(data, 0, _HEADER.size, "header")
    _, version, K, n_voc, w, seed, epochs, prng_id = _HEADER.unpack_from(data)
    if version != MODEL_VERSION:
        raise VersionMismatchError(f"unsupported model version {version}")

    n_weights = K * 2 * n_voc
    _take(data, pos, 4 * n_weights + 2 * _U32.size, "weights")
    (crc,) = _U32.unpack_from(data, len(data) - _U32.size)
    body = data[: -_U32.size]
    if crc != zlib.crc32(body):
        raise ChecksumError("model checksum mismatch")

    weights = np.frombuffer(body, dtype="<f4", count=n_weights, offset=pos)
    weights = weights.astype(np.float32).reshape(K, 2 * n_voc)
    pos += 4 * n_weights

    start = pos
    pos = _take(body, pos, 4, "vocabulary size")
    (n_tokens,) = _U32.unpack_from(body, start)
    if n_tokens != n_voc:
        raise DimensionMismatchError(f"vocabulary has {n_tokens} tokens, header says {n_voc}")
    tokens, counts = [], []
    for _ in range(n_tokens):
        start = pos
        pos = _take(body, pos, 4, "token length")
        (length,) = _U32.unpack_from(body, start)
        start = pos
        pos = _take(body, pos, length, "token")
        try:
            tokens.append(body[start:pos].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise ModelFormatError(f"token {len(tokens)} is not valid UTF-8") from exc
        start = pos
        pos = _take(body, pos, 8, "token count")
        counts.append(_U64.unpack_from(body, start)[0])

    if pos != len(body):
        raise ModelFormatError(f"{len(body) - pos} trailing bytes before checksum")

    vocab = Vocabulary(tokens, np.array(counts, dtype=np.int64))
    return FlyModel(weights, vocab, w, seed, epochs, prng_id)
