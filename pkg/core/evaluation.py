"""Word similarity, nearest neighbours and word-in-context scoring on hash codes."""

import itertools
import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.stats import rankdata

from core.corpus import WGram
from core.datasets import ContextPairRecord, WordPairRecord
from core.errors import ConfigurationError, EvaluationError
from core.model import (
    FlyModel,
    HashCode,
    check_hash_length,
    codes_to_dense,
    context_embedding,
    static_embedding,
    static_embeddings,
)

logger = logging.getLogger(__name__)

TASKS = ("wic", "scws")


# === Metrics ===


def _as_bits(h) -> np.ndarray:
    if isinstance(h, HashCode):
        return h.to_dense()
    return np.asarray(h).astype(bool).astype(np.uint8)


def binary_similarity(h1, h2) -> float:
    """Fraction of positions where two binary vectors agree: (n11 + n00) / n."""
    a, b = _as_bits(h1), _as_bits(h2)
    if a.shape != b.shape:
        raise EvaluationError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise EvaluationError("cannot compare empty codes")
    return float(np.mean(a == b))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise EvaluationError("spearman needs two sequences of equal length")
    if len(x) < 2:
        raise EvaluationError("spearman needs at least two values")
    rx, ry = rankdata(x), rankdata(y)
    if np.all(rx == rx[0]) or np.all(ry == ry[0]):
        raise EvaluationError("spearman is undefined for a constant sequence")
    rx -= rx.mean()
    ry -= ry.mean()
    rho = float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
    return min(1.0, max(-1.0, rho))


# === Static similarity ===


@dataclass
class WordSimResult:
    rho: float
    coverage: float
    scored: int
    total: int


def evaluate_wordsim(model: FlyModel, records: Sequence[WordPairRecord], k: int) -> WordSimResult:
    """Spearman rho between human scores and static-hash similarities; OOV pairs skipped."""
    human, predicted = [], []
    for rec in records:
        i, j = model.vocab.id_of(rec.word1), model.vocab.id_of(rec.word2)
        if i is None or j is None:
            continue
        predicted.append(
            binary_similarity(
                static_embedding(model.weights, i, k), static_embedding(model.weights, j, k)
            )
        )
        human.append(rec.human_score)
    if not human:
        raise EvaluationError("no scorable word pairs (all pairs out of vocabulary)")
    coverage = len(human) / len(records)
    logger.info("word similarity: %d/%d pairs in vocabulary", len(human), len(records))
    return WordSimResult(spearman(human, predicted), coverage, len(human), len(records))


# === Neighbours in hash space ===


class HashSpace:
    """Static hash codes of the whole vocabulary at one hash length."""

    def __init__(self, model: FlyModel, k: int):
        check_hash_length(k, model.K)
        self.model = model
        self.k = k
        self.units = static_embeddings(model.weights, k)
        self._bits = codes_to_dense(self.units, model.K).astype(np.int32)

    def similarities(self, code: HashCode) -> np.ndarray:
        """binary_similarity between code and every word's static code."""
        n11 = self._bits[:, code.active_units].sum(axis=1)
        K = self.model.K
        return (K - 2 * self.k + 2 * n11) / K

    def nearest(self, code: HashCode, q: int, exclude: int | None = None):
        """Top-q word ids by similarity (ties by word id) and their similarities."""
        sims = self.similarities(code)
        order = np.lexsort((np.arange(len(sims)), -sims))
        if exclude is not None:
            order = order[order != exclude]
        top = order[:q]
        return top, sims[top]


class ContextScorer:
    """Caches hash spaces per hash length for repeated queries on one model."""

    def __init__(self, model: FlyModel):
        self.model = model
        self._spaces: dict[int, HashSpace] = {}

    def space(self, k: int) -> HashSpace:
        if k not in self._spaces:
            self._spaces[k] = HashSpace(self.model, k)
        return self._spaces[k]

    def query(self, tokens: Sequence[str], index: int, w: int) -> WGram | None:
        """W-gram around tokens[index], truncated at sentence edges; None if target is OOV."""
        vocab = self.model.vocab
        if vocab.id_of(tokens[index]) is None:
            return None
        kept = [(pos, vocab.id_of(t)) for pos, t in enumerate(tokens) if t in vocab]
        centre = next(n for n, (pos, _) in enumerate(kept) if pos == index)
        half = w // 2 if w > 0 else 0
        left = kept[max(0, centre - half) : centre]
        right = kept[centre + 1 : centre + 1 + half]
        context = tuple(i for _, i in left + right)
        return WGram(context, kept[centre][1], w)

    def code(self, g: WGram, k: int) -> HashCode:
        return context_embedding(self.model.weights, g, k)

    def neighbors(self, g: WGram, q: int, k: int):
        code = self.code(g, k)
        return self.space(k).nearest(code, q, exclude=g.target_id)


def check_neighbor_count(q: int, n_voc: int) -> None:
    """The query word is never its own neighbour, so at most n_voc - 1 remain."""
    if not 1 <= q <= n_voc - 1:
        raise ConfigurationError(f"q must be in [1, {n_voc - 1}], got {q}")


def nearest_neighbors(model: FlyModel, query: WGram, q: int, k: int) -> list[int]:
    """The q vocabulary words whose static codes are closest to the query's context code."""
    check_neighbor_count(q, model.n_voc)
    ids, _ = ContextScorer(model).neighbors(query, q, k)
    return [int(i) for i in ids]


# === Word in context ===


@dataclass
class DisambiguationConfig:
    alpha: float = 0.5
    q: int = 10
    theta: float = 0.5
    k: int = 50
    w: int = 5

    def validate(self) -> "DisambiguationConfig":
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.q < 1:
            raise ConfigurationError(f"q must be >= 1, got {self.q}")
        if self.w < 0 or (self.w > 0 and self.w % 2 == 0):
            raise ConfigurationError(f"w must be 0 or odd, got {self.w}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DisambiguationGrid:
    """Search space; grid order is product(k, w, q, alpha, theta)."""

    thetas: list[float] = field(default_factory=lambda: [0.5])
    alphas: list[float] = field(default_factory=lambda: [0.5])
    qs: list[int] = field(default_factory=lambda: [10])
    ks: list[int] = field(default_factory=lambda: [50])
    ws: list[int] = field(default_factory=lambda: [5])

    def configs(self) -> list[DisambiguationConfig]:
        return [
            DisambiguationConfig(alpha, q, theta, k, w).validate()
            for k, w, q, alpha, theta in itertools.product(
                self.ks, self.ws, self.qs, self.alphas, self.thetas
            )
        ]


class _Components:
    """J_dot and neighbour lists of every record, per (k, w)."""

    def __init__(self, scorer: ContextScorer, records: Sequence[ContextPairRecord], q_max: int):
        check_neighbor_count(q_max, scorer.model.n_voc)
        self.scorer = scorer
        self.records = list(records)
        self.q_max = q_max
        self._cache: dict[tuple[int, int], tuple] = {}

    def get(self, k: int, w: int):
        key = (k, w)
        if key not in self._cache:
            scorable = np.zeros(len(self.records), dtype=bool)
            j_dot = np.zeros(len(self.records))
            neighbors = []
            q = self.q_max
            for n, rec in enumerate(self.records):
                g1 = self.scorer.query(rec.sentence1, rec.target_index1, w)
                g2 = self.scorer.query(rec.sentence2, rec.target_index2, w)
                if g1 is None or g2 is None:
                    neighbors.append((None, None))
                    continue
                h1, h2 = self.scorer.code(g1, k), self.scorer.code(g2, k)
                scorable[n] = True
                j_dot[n] = len(np.intersect1d(h1.active_units, h2.active_units)) / k
                space = self.scorer.space(k)
                nn1, _ = space.nearest(h1, q, exclude=g1.target_id)
                nn2, _ = space.nearest(h2, q, exclude=g2.target_id)
                neighbors.append((nn1, nn2))
            self._cache[key] = (scorable, j_dot, neighbors)
        return self._cache[key]

    def scores(self, cfg: DisambiguationConfig, subset: np.ndarray | None = None):
        """(J, scorable mask) for the records in subset (all records by default)."""
        scorable, j_dot, neighbors = self.get(cfg.k, cfg.w)
        idx = np.arange(len(self.records)) if subset is None else subset
        j = np.zeros(len(idx))
        for n, r in enumerate(idx):
            if not scorable[r]:
                continue
            nn1, nn2 = neighbors[r]
            j_nn = len(np.intersect1d(nn1[: cfg.q], nn2[: cfg.q])) / cfg.q
            j[n] = cfg.alpha * j_dot[r] + (1.0 - cfg.alpha) * j_nn
        return j, scorable[idx]


def disambiguation_score(
    model: FlyModel, rec: ContextPairRecord, cfg: DisambiguationConfig
) -> float | None:
    """J = alpha * J_dot + (1 - alpha) * J_nn; None when a target word is out of vocabulary."""
    cfg.validate()
    check_hash_length(cfg.k, model.K)
    j, scorable = _Components(ContextScorer(model), [rec], cfg.q).scores(cfg)
    return float(j[0]) if scorable[0] else None


def _labels(records: Sequence[ContextPairRecord]) -> np.ndarray:
    return np.array([rec.label for rec in records], dtype=np.float64)


def _metric(task: str, j: np.ndarray, labels: np.ndarray, theta: float) -> float:
    if len(j) == 0:
        raise EvaluationError("no scorable records")
    if task == "wic":
        return float(np.mean((j > theta) == (labels > 0.5)))
    return spearman(np.where(j > theta, j, 0.0), labels)


def _evaluate(components: _Components, task: str, cfg: DisambiguationConfig, subset=None) -> float:
    j, scorable = components.scores(cfg, subset)
    idx = np.arange(len(components.records)) if subset is None else subset
    labels = _labels(components.records)[idx]
    skipped = int((~scorable).sum())
    if skipped:
        logger.debug("%d record(s) skipped: target out of vocabulary", skipped)
    return _metric(task, j[scorable], labels[scorable], cfg.theta)


def _check_task(task: str) -> None:
    if task not in TASKS:
        raise ConfigurationError(f"task must be one of {TASKS}, got {task!r}")


def evaluate_wic(
    model: FlyModel, records: Sequence[ContextPairRecord], cfg: DisambiguationConfig
) -> float:
    """Accuracy of predicting "same sense" when J > theta."""
    cfg.validate()
    return _evaluate(_Components(ContextScorer(model), records, cfg.q), "wic", cfg)


def evaluate_scws(
    model: FlyModel, records: Sequence[ContextPairRecord], cfg: DisambiguationConfig
) -> float:
    """Spearman rho of human scores against J (zero where J <= theta)."""
    cfg.validate()
    return _evaluate(_Components(ContextScorer(model), records, cfg.q), "scws", cfg)


def coverage(model: FlyModel, records: Sequence[ContextPairRecord]) -> float:
    """Fraction of records whose two target words are both in vocabulary."""
    if not records:
        return 0.0
    vocab = model.vocab
    ok = sum(1 for rec in records if rec.target1 in vocab and rec.target2 in vocab)
    return ok / len(records)


def _tune(components: _Components, task: str, grid: DisambiguationGrid, subset=None):
    best, best_metric = None, -np.inf
    for cfg in grid.configs():
        try:
            metric = _evaluate(components, task, cfg, subset)
        except EvaluationError:
            metric = -np.inf
        if best is None or metric > best_metric:
            best, best_metric = cfg, metric
    return best, best_metric


def tune(
    model: FlyModel,
    records: Sequence[ContextPairRecord],
    grid: DisambiguationGrid,
    task: str = "wic",
) -> tuple[DisambiguationConfig, float]:
    """Exhaustive grid search; the first grid point wins ties."""
    _check_task(task)
    configs = grid.configs()
    if not configs or not records:
        raise EvaluationError("tuning needs a non-empty grid and dev set")
    for k in grid.ks:
        check_hash_length(k, model.K)
    components = _Components(ContextScorer(model), records, max(grid.qs))
    return _tune(components, task, grid)


@dataclass
class FoldResult:
    fold: int
    config: DisambiguationConfig
    dev_metric: float
    test_metric: float


@dataclass
class CrossValidationResult:
    mean: float
    std: float
    folds: list[FoldResult]


def cross_validate(
    model: FlyModel,
    records: Sequence[ContextPairRecord],
    grid: DisambiguationGrid,
    task: str = "wic",
    folds: int = 5,
    retune_each_fold: bool = True,
) -> CrossValidationResult:
    """Each fold in turn is the dev set, the other folds are the test set.

    Fold of record i is i mod folds. With retune_each_fold=False the grid is
    searched on the first fold only and that configuration is reused.
    """
    _check_task(task)
    if folds < 2:
        raise ConfigurationError(f"folds must be >= 2, got {folds}")
    if len(records) < folds:
        raise EvaluationError(f"{len(records)} records are too few for {folds} folds")
    for k in grid.ks:
        check_hash_length(k, model.K)
    components = _Components(ContextScorer(model), records, max(grid.qs))
    assignment = np.arange(len(records)) % folds

    results, fixed = [], None
    for fold in range(folds):
        dev = np.flatnonzero(assignment == fold)
        test = np.flatnonzero(assignment != fold)
        if fixed is None or retune_each_fold:
            cfg, dev_metric = _tune(components, task, grid, dev)
            fixed = (cfg, dev_metric)
        else:
            cfg = fixed[0]
            try:
                dev_metric = _evaluate(components, task, cfg, dev)
            except EvaluationError:
                dev_metric = -np.inf
        test_metric = _evaluate(components, task, cfg, test)
        logger.info("fold %d: dev=%.4f test=%.4f %s", fold, dev_metric, test_metric, cfg)
        results.append(FoldResult(fold, replace(cfg), dev_metric, test_metric))

    metrics = np.array([r.test_metric for r in results])
    return CrossValidationResult(float(metrics.mean()), float(metrics.std()), results)
