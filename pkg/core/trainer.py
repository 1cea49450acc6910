"""Epoch driver: shuffled minibatches, gather-then-apply updates, annealing.

Within a minibatch every sample sees the weights as they were at the start of
the minibatch. Per-unit contributions are gathered (an integer count per touched
input and a scalar row coefficient) and applied once, as

    W[mu] <- W[mu] * (1 - c_mu) + sparse_mu

so the dense part of the rule costs O(K * 2 N_voc) per minibatch, not per sample.
"""

import json
import logging
import time
from collections.abc import Callable, Iterable, Sequence
from dataclasses import asdict, dataclass, replace

import numpy as np
from joblib import Parallel, delayed
from scipy import sparse

from core.corpus import (
    SampleSet,
    Vocabulary,
    build_vocabulary,
    check_window,
    encode_corpus,
    occurrence_probabilities,
    shuffle_epoch,
    tokenize,
    uniform_probabilities,
)
from core.errors import ConfigurationError, DivergenceError, EmptyCorpusError
from core.model import FlyModel, energy_terms, init_weights, transposed64

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6


@dataclass
class TrainingConfig:
    """Hyperparameters of a training run (defaults follow the recommended ranges)."""

    K: int = 400
    w: int = 11
    n_voc: int = 20000
    epochs: int = 15
    lr0: float = 3e-4
    batch_size: int = 10000
    seed: int = 0
    workers: int = 1
    probe_size: int = 10000
    reweight: bool = True

    def validate(self) -> "TrainingConfig":
        if self.epochs < 1:
            raise ConfigurationError("nothing to train: epochs must be >= 1")
        check_window(self.w)
        if self.K < 1:
            raise ConfigurationError(f"K must be >= 1, got {self.K}")
        if self.n_voc < 1:
            raise ConfigurationError(f"n_voc must be >= 1, got {self.n_voc}")
        if self.lr0 < 0 or not np.isfinite(self.lr0):
            raise ConfigurationError(f"lr0 must be finite and >= 0, got {self.lr0}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.probe_size < 1:
            raise ConfigurationError(f"probe_size must be >= 1, got {self.probe_size}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpochReport:
    """Monitoring record written after every epoch."""

    epoch: int
    energy: float
    samples_per_sec: float
    seconds: float
    lr: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


def learning_rate(epoch: int, cfg: TrainingConfig) -> float:
    """Linear annealing from lr0 at epoch 0 down to lr0 / epochs at the last epoch."""
    if not 0 <= epoch < cfg.epochs:
        raise ConfigurationError(f"epoch {epoch} outside schedule of {cfg.epochs} epochs")
    return cfg.lr0 * (1.0 - epoch / cfg.epochs)


def probe_energy(W: np.ndarray, probe: sparse.csr_matrix, p: np.ndarray) -> float:
    """Mean per-sample energy over a fixed probe set."""
    terms = energy_terms(W, probe, p)
    if len(terms) == 0:
        raise EmptyCorpusError("empty probe set")
    return float(terms.mean())


# === Minibatch update ===


def _chunk_winners(X: sparse.csr_matrix, W: np.ndarray, WT64: np.ndarray, inv_p: np.ndarray):
    """Winner and <W_win, v/p> for every sample of a chunk, against fixed weights."""
    n = X.shape[0]
    mu = np.argmax(np.asarray(X @ WT64), axis=1)
    owner = np.repeat(np.arange(n), np.diff(X.indptr))
    weighted = W[mu[owner], X.indices].astype(np.float64) * inv_p[X.indices]
    inner = np.bincount(owner, weights=weighted, minlength=n)
    return mu, inner


def minibatch_update(
    W: np.ndarray,
    X: sparse.csr_matrix,
    inv_p: np.ndarray,
    eps: float,
    workers: int = 1,
) -> np.ndarray:
    """Apply one gathered update in place; returns the units that changed.

    Workers only read W and each computes a contiguous slice of samples; the
    reduction runs once, in ascending sample order, so worker count never
    changes the result. A unit's step is scaled down when eps times the sum of
    its samples' inner products exceeds 1.
    """
    n, dim = X.shape
    K = W.shape[0]
    WT64 = transposed64(W)
    if workers > 1 and n > 1:
        bounds = np.linspace(0, n, min(workers, n) + 1).astype(np.int64)
        parts = Parallel(n_jobs=workers, backend="threading")(
            delayed(_chunk_winners)(X[lo:hi], W, WT64, inv_p)
            for lo, hi in zip(bounds[:-1], bounds[1:], strict=True)
        )
        mu = np.concatenate([part[0] for part in parts])
        inner = np.concatenate([part[1] for part in parts])
    else:
        mu, inner = _chunk_winners(X, W, WT64, inv_p)

    coefficient = eps * np.bincount(mu, weights=inner, minlength=K)

    owner = np.repeat(np.arange(n), np.diff(X.indptr))
    keys = mu[owner].astype(np.int64) * dim + X.indices
    keys, counts = np.unique(keys, return_counts=True)
    rows, cols = np.divmod(keys, dim)
    values = eps * counts * inv_p[cols]

    # A unit whose summed decay exceeds 1 takes the step that lands exactly on
    # (sum of v/p) / (sum of inner products); the row factor stays in [0, 1].
    units = np.unique(mu)
    step = np.ones(len(units))
    over = coefficient[units] > 1.0
    step[over] = 1.0 / coefficient[units][over]
    positions = np.searchsorted(units, rows)
    updated = W[units].astype(np.float64) * (1.0 - step * coefficient[units])[:, None]
    updated[positions, cols] += step[positions] * values

    bad = ~np.isfinite(updated) | (np.abs(updated) > DIVERGENCE_LIMIT)
    if bad.any():
        unit = int(units[np.flatnonzero(bad.any(axis=1))[0]])
        raise DivergenceError(
            f"weights of unit {unit} diverged (non-finite or |W| > {DIVERGENCE_LIMIT:g}); "
            "lower lr0 or batch_size",
            unit,
        )
    W[units] = updated.astype(W.dtype)
    return units


# === Training loop ===


class Trainer:
    """Runs the epoch schedule over an encoded sample set."""

    def __init__(
        self,
        config: TrainingConfig,
        p: np.ndarray,
        on_epoch_end: Callable[[EpochReport, np.ndarray], None] | None = None,
    ):
        self.config = config.validate()
        self.p = np.asarray(p, dtype=np.float64)
        self.inv_p = 1.0 / self.p
        self.on_epoch_end = on_epoch_end

    def probe_set(self, samples: SampleSet) -> sparse.csr_matrix:
        """First probe_size samples of epoch 0's shuffle; identical for every epoch."""
        order = shuffle_epoch(len(samples), 0, self.config.seed)
        return samples.rows(order[: min(self.config.probe_size, len(samples))])

    def fit(
        self,
        samples: SampleSet,
        weights: np.ndarray | None = None,
        start_epoch: int = 0,
    ) -> tuple[np.ndarray, list[EpochReport]]:
        cfg = self.config
        if len(samples) == 0:
            raise EmptyCorpusError("corpus yields no w-grams")
        if samples.n_voc * 2 != len(self.p):
            raise ConfigurationError("probability vector does not match the sample dimension")
        if start_epoch >= cfg.epochs:
            raise ConfigurationError(
                f"nothing to train: {start_epoch} of {cfg.epochs} epochs already done"
            )
        if weights is None:
            W = init_weights(cfg.K, samples.n_voc, cfg.seed)
        else:
            W = np.array(weights, dtype=np.float32)
            if W.shape != (cfg.K, samples.dim):
                raise ConfigurationError(f"initial weights have shape {W.shape}")

        probe = self.probe_set(samples)
        n = len(samples)
        reports = []
        for epoch in range(start_epoch, cfg.epochs):
            lr = learning_rate(epoch, cfg)
            order = shuffle_epoch(n, epoch, cfg.seed)
            started = time.perf_counter()
            for lo in range(0, n, cfg.batch_size):
                batch = samples.rows(order[lo : lo + cfg.batch_size])
                minibatch_update(W, batch, self.inv_p, lr, cfg.workers)
            seconds = time.perf_counter() - started
            report = EpochReport(
                epoch=epoch,
                energy=probe_energy(W, probe, self.p),
                samples_per_sec=n / max(seconds, 1e-9),
                seconds=seconds,
                lr=lr,
            )
            logger.info(
                "epoch %d/%d lr=%.3g energy=%.6g %.0f samples/s",
                epoch + 1,
                cfg.epochs,
                lr,
                report.energy,
                report.samples_per_sec,
            )
            reports.append(report)
            if self.on_epoch_end is not None:
                self.on_epoch_end(report, W)
        return W, reports


def probabilities_for(vocab: Vocabulary, cfg: TrainingConfig) -> np.ndarray:
    return occurrence_probabilities(vocab) if cfg.reweight else uniform_probabilities(vocab.n_voc)


def train(
    lines: Iterable[str],
    cfg: TrainingConfig,
    on_epoch_end: Callable[[EpochReport, np.ndarray], None] | None = None,
) -> tuple[FlyModel, list[EpochReport]]:
    """Vocabulary, encoding and training in one call, for in-memory corpora."""
    cfg.validate()
    lines = list(lines)
    vocab = build_vocabulary((tok for line in lines for tok in tokenize(line)), cfg.n_voc)
    samples = encode_corpus(lines, vocab, cfg.w, cfg.workers)
    W, reports = Trainer(cfg, probabilities_for(vocab, cfg), on_epoch_end).fit(samples)
    return FlyModel(W, vocab, cfg.w, cfg.seed, cfg.epochs), reports


# === Scaling benchmark ===


@dataclass
class BenchmarkRow:
    K: int
    n_voc: int
    samples: int
    seconds: float


def benchmark_scaling(
    lines: Sequence[str],
    base: TrainingConfig,
    Ks: Sequence[int],
    n_vocs: Sequence[int],
    sample_counts: Sequence[int],
) -> list[BenchmarkRow]:
    """Time one training epoch for every (K, n_voc, sample count) grid point."""
    if not Ks or not n_vocs or not sample_counts:
        raise ConfigurationError("every benchmark axis needs at least one value")
    tokens = [tok for line in lines for tok in tokenize(line)]
    rows = []
    for n_voc in n_vocs:
        vocab = build_vocabulary(tokens, n_voc)
        samples = encode_corpus(lines, vocab, base.w, base.workers)
        p = probabilities_for(vocab, base)
        for count in sample_counts:
            if count > len(samples):
                raise ConfigurationError(
                    f"benchmark asks for {count} samples, corpus has {len(samples)}"
                )
            subset = samples.subset(count)
            for K in Ks:
                cfg = replace(base, K=K, n_voc=n_voc, epochs=1)
                _, reports = Trainer(cfg, p).fit(subset)
                rows.append(BenchmarkRow(K, vocab.n_voc, count, reports[0].seconds))
                logger.info(
                    "bench K=%d n_voc=%d samples=%d: %.3fs/epoch",
                    K,
                    vocab.n_voc,
                    count,
                    reports[0].seconds,
                )
    return rows
