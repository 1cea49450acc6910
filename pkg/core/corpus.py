"""Corpus ingestion: tokens, vocabulary, w-grams and context-target samples.

A training sample is the binary vector v^A of length 2 * N_voc: the first block
holds the bag of context words, the second block the one-hot target word.
Samples are stored sparsely as the sorted list of their active indices.
"""

import logging
import re
import struct
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from numpy.lib.stride_tricks import sliding_window_view
from scipy import sparse

from core.errors import (
    BadMagicError,
    ConfigurationError,
    EmptyCorpusError,
    IdOutOfRangeError,
    InputEncodingError,
    TruncatedFileError,
    VersionMismatchError,
)

logger = logging.getLogger(__name__)

# Identifier of the shuffling/initialisation generator, stored in model files.
PRNG_ID = 1
PRNG_NAME = "pcg64-seedsequence"

# Stream keys keep independent generators for independent purposes.
SHUFFLE_STREAM = 1

CACHE_MAGIC = b"FLYG"
CACHE_VERSION = 1
_CACHE_HEADER = struct.Struct("<4sIIIQ")

_FLANK_RE = re.compile(r"^[\W_]+|[\W_]+$")
_SENTENCE_END_RE = re.compile(r"(?<=[.?!])\s+")


# === Tokens and sentences ===


def tokenize(line: str) -> list[str]:
    """Lowercase, split on whitespace and strip flanking punctuation."""
    tokens = []
    for raw in line.lower().split():
        token = _FLANK_RE.sub("", raw)
        if token:
            tokens.append(token)
    return tokens


def split_sentences(paragraph: str) -> list[str]:
    """Split a paragraph after '.', '?' or '!' followed by whitespace."""
    return [s.strip() for s in _SENTENCE_END_RE.split(paragraph.strip()) if s.strip()]


def numbered_lines(path: Path | str) -> Iterator[tuple[int, str]]:
    """(line number, line without newline) pairs of a UTF-8 text file."""
    try:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                yield lineno, line.rstrip("\n")
    except UnicodeDecodeError as e:
        raise InputEncodingError(f"{path}: not valid UTF-8 ({e.reason})") from e


def iter_lines(paths: Iterable[Path | str]) -> Iterator[str]:
    """Yield lines (without newline) from UTF-8 text files in order."""
    for path in paths:
        for _, line in numbered_lines(path):
            yield line


# === Vocabulary ===


@dataclass
class Vocabulary:
    """Token <-> id map with corpus counts, ordered by descending count."""

    tokens: list[str]
    counts: np.ndarray
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.tokens) != len(self.counts):
            raise ConfigurationError("tokens and counts differ in length")
        self._index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise ConfigurationError("vocabulary tokens are not unique")
        if len(self.counts) and self.counts.min() <= 0:
            raise ConfigurationError("vocabulary counts must be positive")

    @property
    def n_voc(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.tokens == other.tokens and np.array_equal(self.counts, other.counts)

    def id_of(self, token: str) -> int | None:
        """Return the id of a token, or None when it is out of vocabulary."""
        return self._index.get(token)

    def ids(self, tokens: Iterable[str]) -> list[int]:
        """Map tokens to ids, dropping out-of-vocabulary tokens."""
        index = self._index
        return [index[t] for t in tokens if t in index]

    def save(self, path: Path | str) -> None:
        """Write "token<TAB>count" lines in id order."""
        with open(path, "w", encoding="utf-8") as f:
            for token, count in zip(self.tokens, self.counts, strict=True):
                f.write(f"{token}\t{int(count)}\n")

    @classmethod
    def load(cls, path: Path | str) -> "Vocabulary":
        tokens: list[str] = []
        counts: list[int] = []
        for lineno, line in numbered_lines(path):
            if not line:
                continue
            token, sep, count = line.rpartition("\t")
            if not sep:
                raise ConfigurationError(f"{path}:{lineno}: expected token<TAB>count")
            try:
                counts.append(int(count))
            except ValueError as e:
                raise ConfigurationError(
                    f"{path}:{lineno}: count {count!r} is not an integer"
                ) from e
            tokens.append(token)
        return cls(tokens, np.array(counts, dtype=np.int64))


def vocabulary_from_counts(counter: Counter, n_voc: int) -> Vocabulary:
    """Keep the n_voc most frequent tokens; ties go to the lexicographically smaller token."""
    if n_voc < 1:
        raise ConfigurationError(f"n_voc must be >= 1, got {n_voc}")
    if not counter:
        raise EmptyCorpusError("empty corpus")
    ranked = sorted(counter.items(), key=lambda item: (-item[1], item[0]))[:n_voc]
    return Vocabulary([tok for tok, _ in ranked], np.array([c for _, c in ranked], dtype=np.int64))


def build_vocabulary(token_stream: Iterable[str], n_voc: int) -> Vocabulary:
    """Count a token stream and keep its n_voc most frequent tokens."""
    return vocabulary_from_counts(Counter(token_stream), n_voc)


def _count_file(path: Path | str) -> Counter:
    counter: Counter = Counter()
    for line in iter_lines([path]):
        counter.update(tokenize(line))
    return counter


def build_vocabulary_from_files(
    paths: Sequence[Path | str], n_voc: int, workers: int = 1
) -> Vocabulary:
    """Count file shards in parallel, then merge counts and rank globally."""
    partials = Parallel(n_jobs=workers)(delayed(_count_file)(p) for p in paths)
    total: Counter = Counter()
    for part in partials:
        total.update(part)
    logger.info("counted %d distinct tokens in %d file(s)", len(total), len(paths))
    return vocabulary_from_counts(total, n_voc)


def occurrence_probabilities(vocab: Vocabulary) -> np.ndarray:
    """Word probabilities f duplicated into a vector p of length 2 * N_voc."""
    if vocab.n_voc == 0:
        raise EmptyCorpusError("empty vocabulary")
    f = vocab.counts.astype(np.float64) / float(vocab.counts.sum())
    return np.concatenate([f, f])


def uniform_probabilities(n_voc: int) -> np.ndarray:
    """Equal-frequency p; training with it is plain spherical K-means."""
    return np.full(2 * n_voc, 1.0 / n_voc, dtype=np.float64)


# === W-grams and encoded samples ===


@dataclass(frozen=True)
class WGram:
    """A window of w in-vocabulary words; the centre word is the target."""

    context_ids: tuple[int, ...]
    target_id: int
    w: int


@dataclass(frozen=True)
class EncodedSample:
    """Sorted active indices of a binary context-target vector."""

    active_indices: np.ndarray

    def __len__(self) -> int:
        return len(self.active_indices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EncodedSample):
            return NotImplemented
        return np.array_equal(self.active_indices, other.active_indices)

    def __hash__(self) -> int:
        return hash(self.active_indices.tobytes())


def check_window(w: int, allow_zero: bool = False) -> None:
    if allow_zero and w == 0:
        return
    if w < 3 or w % 2 == 0:
        raise ConfigurationError(f"window w must be odd and >= 3, got {w}")


def sentence_to_wgrams(sentence_tokens: Sequence[str], w: int, vocab: Vocabulary) -> list[WGram]:
    """Drop OOV tokens, then slide a full window of size w over the sentence."""
    check_window(w)
    ids = vocab.ids(sentence_tokens)
    half = w // 2
    grams = []
    for start in range(len(ids) - w + 1):
        window = ids[start : start + w]
        grams.append(WGram(tuple(window[:half] + window[half + 1 :]), window[half], w))
    return grams


def encode_wgram(g: WGram, n_voc: int) -> EncodedSample:
    """Context ids as a set in the first block, target one-hot in the second."""
    ids = list(g.context_ids) + [g.target_id]
    if any(i < 0 or i >= n_voc for i in ids):
        raise IdOutOfRangeError(f"id out of range for vocabulary of size {n_voc}")
    context = sorted(set(g.context_ids))
    return EncodedSample(np.array(context + [n_voc + g.target_id], dtype=np.int64))


def encode_ids(ids: np.ndarray, w: int, n_voc: int) -> tuple[np.ndarray, np.ndarray]:
    """Encode every full window of an id sequence at once.

    Returns (lengths, indices): per-sample active counts and the concatenated
    sorted active indices, in window order.
    """
    ids = np.asarray(ids, dtype=np.int64)
    if len(ids) < w:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    windows = sliding_window_view(ids, w)
    half = w // 2
    context = np.sort(np.delete(windows, half, axis=1), axis=1)
    keep = np.ones(context.shape, dtype=bool)
    keep[:, 1:] = context[:, 1:] != context[:, :-1]
    full = np.concatenate([context, n_voc + windows[:, half : half + 1]], axis=1)
    full_keep = np.concatenate([keep, np.ones((len(full), 1), dtype=bool)], axis=1)
    return full_keep.sum(axis=1), full[full_keep]


@dataclass
class SampleSet:
    """All encoded samples of a corpus in compressed-row form."""

    indptr: np.ndarray
    indices: np.ndarray
    n_voc: int
    w: int

    def __len__(self) -> int:
        return len(self.indptr) - 1

    def __getitem__(self, i: int) -> EncodedSample:
        return EncodedSample(self.indices[self.indptr[i] : self.indptr[i + 1]].astype(np.int64))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            self.n_voc == other.n_voc
            and self.w == other.w
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    @property
    def dim(self) -> int:
        return 2 * self.n_voc

    @classmethod
    def from_samples(cls, samples: Sequence[EncodedSample], n_voc: int, w: int) -> "SampleSet":
        lengths = np.array([len(s) for s in samples], dtype=np.int64)
        indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        if len(samples):
            indices = np.concatenate([s.active_indices for s in samples]).astype(np.int32)
        else:
            indices = np.zeros(0, dtype=np.int32)
        return cls(indptr, indices, n_voc, w)

    def subset(self, count: int) -> "SampleSet":
        """The first count samples."""
        indptr = self.indptr[: count + 1].copy()
        return SampleSet(indptr, self.indices[: indptr[-1]], self.n_voc, self.w)

    def rows(self, order: np.ndarray) -> sparse.csr_matrix:
        """Binary CSR matrix of the selected samples, in the given order."""
        order = np.asarray(order, dtype=np.int64)
        starts = self.indptr[order]
        lengths = self.indptr[order + 1] - starts
        indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        positions = np.repeat(starts - indptr[:-1], lengths) + np.arange(indptr[-1])
        data = np.ones(indptr[-1], dtype=np.float64)
        return sparse.csr_matrix(
            (data, self.indices[positions], indptr), shape=(len(order), self.dim)
        )


def _encode_chunk(lines: list[str], index: dict[str, int], w: int, n_voc: int):
    lengths, indices = [], []
    for line in lines:
        ids = [index[t] for t in tokenize(line) if t in index]
        lens, idx = encode_ids(np.array(ids, dtype=np.int64), w, n_voc)
        if len(lens):
            lengths.append(lens)
            indices.append(idx)
    if not lengths:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(lengths), np.concatenate(indices)


def encode_corpus(
    lines: Iterable[str], vocab: Vocabulary, w: int, workers: int = 1, chunk_size: int = 20000
) -> SampleSet:
    """Encode a sentence-per-line corpus; chunks are encoded in parallel, kept in line order."""
    check_window(w)
    lines = list(lines)
    chunks = [lines[i : i + chunk_size] for i in range(0, len(lines), chunk_size)]
    index = {tok: i for i, tok in enumerate(vocab.tokens)}
    parts = Parallel(n_jobs=workers)(
        delayed(_encode_chunk)(chunk, index, w, vocab.n_voc) for chunk in chunks
    )
    lengths = [p[0] for p in parts if len(p[0])]
    if not lengths:
        raise EmptyCorpusError("corpus yields no w-grams")
    lengths_all = np.concatenate(lengths)
    indices = np.concatenate([p[1] for p in parts if len(p[0])]).astype(np.int32)
    indptr = np.concatenate([[0], np.cumsum(lengths_all)]).astype(np.int64)
    logger.info("encoded %d w-grams (w=%d) from %d lines", len(lengths_all), w, len(lines))
    return SampleSet(indptr, indices, vocab.n_voc, w)


# === Shuffling ===


def epoch_generator(seed: int, epoch: int) -> np.random.Generator:
    """Generator for one epoch's shuffle; the epoch is part of the stream key."""
    seq = np.random.SeedSequence(seed, spawn_key=(SHUFFLE_STREAM, epoch))
    return np.random.Generator(np.random.PCG64(seq))


def shuffle_epoch(sample_count: int, epoch: int, seed: int) -> np.ndarray:
    """Deterministic permutation of range(sample_count) for (seed, epoch)."""
    if sample_count < 1:
        raise EmptyCorpusError("nothing to shuffle")
    return epoch_generator(seed, epoch).permutation(sample_count)


# === Encoded-sample cache ===


def write_sample_cache(path: Path | str, samples: SampleSet) -> None:
    """Write the FLYG cache: header, then per sample u8 nnz + nnz x u32 indices."""
    lengths = np.diff(samples.indptr)
    if len(lengths) and lengths.max() > 255:
        raise ConfigurationError("sample with more than 255 active indices cannot be cached")
    n = len(samples)
    total = int(samples.indptr[-1])
    record_start = np.arange(n, dtype=np.int64) + 4 * samples.indptr[:-1]
    body = np.zeros(n + 4 * total, dtype=np.uint8)
    body[record_start] = lengths.astype(np.uint8)
    owner = np.repeat(np.arange(n), lengths)
    offset = record_start[owner] + 1 + 4 * (np.arange(total) - samples.indptr[owner])
    index_bytes = samples.indices.astype("<u4").view(np.uint8).reshape(-1, 4)
    body[offset[:, None] + np.arange(4)] = index_bytes
    with open(path, "wb") as f:
        f.write(_CACHE_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, samples.n_voc, samples.w, n))
        f.write(body.tobytes())


def _record_starts(body: np.ndarray) -> np.ndarray:
    """Offsets of every record reached by walking the length bytes from offset 0.

    Pointer doubling over all byte offsets keeps the walk vectorized; offset
    len(body) marks a clean end and len(body) + 1 a record running past it.
    """
    size = len(body)
    end, overrun = size, size + 1
    nxt = np.arange(size + 2, dtype=np.int64)
    nxt[:size] += 1 + 4 * body.astype(np.int64)
    nxt[:size][nxt[:size] > size] = overrun
    reach = np.zeros(size + 2, dtype=bool)
    reach[0] = True
    steps = 1
    while steps <= size:
        reach[nxt[reach]] = True
        nxt = nxt[nxt]
        steps *= 2
    if reach[overrun] or not reach[end]:
        raise TruncatedFileError("last sample record runs past the end of the file")
    return np.flatnonzero(reach[:size])


def read_sample_cache(path: Path | str) -> SampleSet:
    data = Path(path).read_bytes()
    if len(data) < _CACHE_HEADER.size:
        raise TruncatedFileError(f"{path}: truncated header")
    magic, version, n_voc, w, n = _CACHE_HEADER.unpack_from(data)
    if magic != CACHE_MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise VersionMismatchError(f"{path}: unsupported cache version {version}")
    body = np.frombuffer(data, dtype=np.uint8, offset=_CACHE_HEADER.size)
    try:
        record_start = _record_starts(body)
    except TruncatedFileError as exc:
        raise TruncatedFileError(f"{path}: {exc}") from exc
    if len(record_start) != n:
        raise TruncatedFileError(
            f"{path}: header announces {n} samples, body holds {len(record_start)}"
        )
    lengths = body[record_start].astype(np.int64)
    indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    owner = np.repeat(np.arange(n), lengths)
    offset = record_start[owner] + 1 + 4 * (np.arange(indptr[-1]) - indptr[owner])
    raw = body[offset[:, None] + np.arange(4)].copy()
    indices = raw.view("<u4").reshape(-1).astype(np.int32)
    return SampleSet(indptr, indices, n_voc, w)
