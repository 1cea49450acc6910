"""Embedding - hash codes of words and contexts, neighbours, unit probing."""

import argparse
import logging
from pathlib import Path

import numpy as np

from core.base_command import BaseCommand, RunContext
from core.corpus import EncodedSample, check_window, tokenize
from core.errors import ConfigurationError, IdOutOfRangeError, OutOfVocabularyError
from core.evaluation import ContextScorer, HashSpace, check_neighbor_count
from core.model import (
    BLOCKS,
    FlyModel,
    HashCode,
    activations,
    check_hash_length,
    kc_word_distribution,
    static_embedding,
)

logger = logging.getLogger(__name__)


def add_query_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("word", nargs="?", default=None, help="Word for a static code")
    p.add_argument("--context", default=None, help="Sentence containing the target word")
    p.add_argument("--target-index", type=int, default=None, help="Token index of the target")
    p.add_argument("--window", type=int, default=None, help="Query window (default: model w)")


def word_id(model: FlyModel, word: str) -> int:
    i = model.vocab.id_of(word.lower())
    if i is None:
        raise OutOfVocabularyError(f"word {word!r} is not in the vocabulary")
    return i


def query_code(args: argparse.Namespace, model: FlyModel, k: int) -> tuple[HashCode, int, dict]:
    """Static code of a word, or context code of the target in --context.

    Returns the code, the query's own word id and a description for reports.
    """
    if (args.word is None) == (args.context is None):
        raise ConfigurationError("give either a word or --context with --target-index")
    if args.word is not None:
        i = word_id(model, args.word)
        return static_embedding(model.weights, i, k), i, {"word": args.word.lower()}

    tokens = tokenize(args.context)
    if args.target_index is None:
        raise ConfigurationError("--context needs --target-index")
    if not 0 <= args.target_index < len(tokens):
        raise IdOutOfRangeError(
            f"target index {args.target_index} outside sentence of {len(tokens)} tokens"
        )
    w = model.w if args.window is None else args.window
    check_window(w, allow_zero=True)
    scorer = ContextScorer(model)
    g = scorer.query(tokens, args.target_index, w)
    if g is None:
        raise OutOfVocabularyError(f"target {tokens[args.target_index]!r} is not in the vocabulary")
    code = scorer.code(g, k)
    return code, g.target_id, {"target": tokens[args.target_index], "window": w}


class EmbeddingCommand(BaseCommand):
    """Hash codes and what they mean.

    Subcommands:
    - embed: active units of a word or of a word in context
    - neighbors: closest vocabulary words in hash space
    - probe-kc: the words a unit responds to most
    """

    def __init__(self):
        super().__init__()
        self.id = "embedding"
        self.name = "Embedding"
        self.description = "Hash codes, neighbours and unit probing"
        self.version = "1.0.0"

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        p = subparsers.add_parser("embed", help="Print the hash code of a word or context")
        p.add_argument("model", type=Path, help="Model file")
        add_query_arguments(p)
        p.add_argument("-k", "--hash-length", type=int, default=None, help="Active units k")
        p.set_defaults(handler=self.embed)

        p = subparsers.add_parser("neighbors", help="Nearest words in hash space")
        p.add_argument("model", type=Path, help="Model file")
        add_query_arguments(p)
        p.add_argument("-k", "--hash-length", type=int, default=None, help="Active units k")
        p.add_argument("-q", type=int, default=None, help="Number of neighbours")
        p.set_defaults(handler=self.neighbors)

        p = subparsers.add_parser("probe-kc", help="Top words of the most activated units")
        p.add_argument("model", type=Path, help="Model file")
        p.add_argument("--unit", type=int, default=None, help="Probe a single unit")
        p.add_argument("--query", default=None, help="Bag of words to activate units with")
        p.add_argument(
            "--target-index", type=int, default=None, help="Query token placed in the target block"
        )
        p.add_argument("--top-m", type=int, default=10, help="Words reported per unit")
        p.add_argument("--units", type=int, default=4, help="Number of top activated units")
        p.add_argument("--block", choices=BLOCKS, default="target", help="Weight block to read")
        p.set_defaults(handler=self.probe_kc)

    def _hash_length(self, args, ctx: RunContext, model: FlyModel) -> int:
        k = args.hash_length or ctx.config.get("hashing.hash_length")
        check_hash_length(k, model.K)
        return k

    def embed(self, args: argparse.Namespace, ctx: RunContext) -> int:
        model = FlyModel.load(args.model)
        k = self._hash_length(args, ctx, model)
        code, _, query = query_code(args, model, k)
        self.write_manifest(args, ctx, [args.model], [])
        self.emit({**query, "k": k, "active_units": code.active_units.tolist()}, ctx)
        return 0

    def neighbors(self, args: argparse.Namespace, ctx: RunContext) -> int:
        model = FlyModel.load(args.model)
        k = self._hash_length(args, ctx, model)
        q = args.q or ctx.config.get("evaluation.q")
        check_neighbor_count(q, model.n_voc)
        code, own_id, query = query_code(args, model, k)
        ids, sims = HashSpace(model, k).nearest(code, q, exclude=own_id)
        rows = [
            {"rank": r + 1, "word": model.vocab.tokens[i], "similarity": float(s)}
            for r, (i, s) in enumerate(zip(ids, sims, strict=True))
        ]
        self.write_manifest(args, ctx, [args.model], [])
        self.emit({**query, "k": k, "neighbors": rows}, ctx)
        return 0

    # === probe-kc ===

    @staticmethod
    def _query_sample(model: FlyModel, query: str, target_index: int | None) -> EncodedSample:
        """Every in-vocabulary query token in the context block, or one moved to the target."""
        tokens = tokenize(query)
        n_voc = model.n_voc
        target = None
        if target_index is not None:
            if not 0 <= target_index < len(tokens):
                raise IdOutOfRangeError(
                    f"target index {target_index} outside query of {len(tokens)} tokens"
                )
            target = word_id(model, tokens[target_index])
            tokens = tokens[:target_index] + tokens[target_index + 1 :]
        context = sorted(set(model.vocab.ids(tokens)))
        if not context and target is None:
            raise OutOfVocabularyError("no query token is in the vocabulary")
        if target is not None:
            return EncodedSample(np.array(context + [n_voc + target], dtype=np.int64))
        return EncodedSample(np.array(context, dtype=np.int64))

    def probe_kc(self, args: argparse.Namespace, ctx: RunContext) -> int:
        model = FlyModel.load(args.model)
        if (args.unit is None) == (args.query is None):
            raise ConfigurationError("give either --unit or --query")
        if args.top_m < 1:
            raise ConfigurationError(f"--top-m must be >= 1, got {args.top_m}")

        if args.unit is not None:
            units = [args.unit]
            acts = None
        else:
            if not 1 <= args.units <= model.K:
                raise ConfigurationError(f"--units must be in [1, {model.K}], got {args.units}")
            acts = activations(model.weights, self._query_sample(model, args.query, args.target_index))
            units = np.argsort(-acts, kind="stable")[: args.units].tolist()

        report_units = []
        for mu in units:
            dist = kc_word_distribution(model.weights, mu, args.block)
            top = np.argsort(-dist, kind="stable")[: args.top_m]
            entry = {
                "unit": int(mu),
                "words": [
                    {"word": model.vocab.tokens[i], "probability": float(dist[i])} for i in top
                ],
            }
            if acts is not None:
                entry["activation"] = float(acts[mu])
            report_units.append(entry)

        self.write_manifest(args, ctx, [args.model], [])
        self.emit({"block": args.block, "units": report_units}, ctx)
        return 0
