"""Evaluation - word similarity, word in context and cluster quality reports."""

import argparse
import logging
from dataclasses import asdict
from pathlib import Path

from core.base_command import BaseCommand, RunContext
from core.clustering import agglomerative_cluster, binarize_topk, cluster_quality
from core.datasets import read_context_pairs, read_vectors, read_word_pairs
from core.errors import ConfigurationError, EvaluationError
from core.evaluation import DisambiguationGrid, coverage, cross_validate, evaluate_wordsim
from core.model import FlyModel, check_hash_length, codes_to_dense, static_embeddings

logger = logging.getLogger(__name__)


class EvaluationCommand(BaseCommand):
    """Benchmarks on trained models.

    Subcommands:
    - eval-sim: Spearman rho on word-pair similarity data
    - eval-wic / eval-scws: tuned, cross-validated context disambiguation
    - cluster: complete-link clusters of static codes and their quality
    """

    def __init__(self):
        super().__init__()
        self.id = "evaluation"
        self.name = "Evaluation"
        self.description = "Word similarity, word in context and clustering reports"
        self.version = "1.0.0"

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        p = subparsers.add_parser("eval-sim", help="Word similarity (Spearman rho)")
        p.add_argument("model", type=Path, help="Model file")
        p.add_argument("pairs", type=Path, help="word1<TAB>word2<TAB>score file")
        p.add_argument("-k", "--hash-length", type=int, default=None, help="Active units k")
        p.set_defaults(handler=self.eval_sim)

        for task in ("wic", "scws"):
            p = subparsers.add_parser(f"eval-{task}", help=f"{task.upper()} with grid search and CV")
            p.add_argument("model", type=Path, help="Model file")
            p.add_argument("pairs", type=Path, help="Context-pair file")
            p.add_argument("--thetas", type=float, nargs="+", default=None, help="Thresholds")
            p.add_argument("--alphas", type=float, nargs="+", default=None, help="J mixing weights")
            p.add_argument("--qs", type=int, nargs="+", default=None, help="Neighbour counts")
            p.add_argument("--hash-lengths", type=int, nargs="+", default=None, help="k values")
            p.add_argument("--windows", type=int, nargs="+", default=None, help="Query windows")
            p.add_argument("--folds", type=int, default=None, help="Cross-validation folds")
            p.add_argument(
                "--tune-first-fold-only",
                action="store_true",
                help="Search the grid on the first fold and reuse its configuration",
            )
            p.set_defaults(handler=self.eval_context, task=task)

        p = subparsers.add_parser("cluster", help="Complete-link clusters of static codes")
        p.add_argument("model", type=Path, help="Model file")
        p.add_argument("-C", "--clusters", type=int, default=None, help="Number of clusters")
        p.add_argument("-k", "--hash-length", type=int, default=None, help="Active units k")
        p.add_argument("--words", type=int, default=None, help="Cluster the N most frequent words")
        p.add_argument("-o", "--output", type=Path, default=None, help="word<TAB>cluster file")
        p.add_argument(
            "--compare-vectors",
            type=Path,
            default=None,
            help="Continuous vectors binarized with top-k, clustered the same way",
        )
        p.set_defaults(handler=self.cluster)

    def _hash_length(self, args, ctx: RunContext, model: FlyModel) -> int:
        k = args.hash_length or ctx.config.get("hashing.hash_length")
        check_hash_length(k, model.K)
        return k

    # === eval-sim ===

    def eval_sim(self, args: argparse.Namespace, ctx: RunContext) -> int:
        model = FlyModel.load(args.model)
        k = self._hash_length(args, ctx, model)
        result = evaluate_wordsim(model, read_word_pairs(args.pairs), k)
        self.write_manifest(args, ctx, [args.model, args.pairs], [])
        self.emit({"task": "similarity", "k": k, **asdict(result)}, ctx)
        return 0

    # === eval-wic / eval-scws ===

    @staticmethod
    def _grid(args, ctx: RunContext) -> DisambiguationGrid:
        get = ctx.config.get
        return DisambiguationGrid(
            thetas=args.thetas or [get("evaluation.theta")],
            alphas=args.alphas or [get("evaluation.alpha")],
            qs=args.qs or [get("evaluation.q")],
            ks=args.hash_lengths or [get("hashing.hash_length")],
            ws=args.windows or [get("evaluation.window")],
        )

    def eval_context(self, args: argparse.Namespace, ctx: RunContext) -> int:
        model = FlyModel.load(args.model)
        records = read_context_pairs(args.pairs)
        folds = args.folds or ctx.config.get("evaluation.folds")
        in_vocab = coverage(model, records)
        skipped = round(len(records) * (1.0 - in_vocab))
        if skipped:
            logger.warning("%d of %d records have an out-of-vocabulary target", skipped, len(records))

        result = cross_validate(
            model,
            records,
            self._grid(args, ctx),
            task=args.task,
            folds=folds,
            retune_each_fold=not args.tune_first_fold_only,
        )
        self.write_manifest(args, ctx, [args.model, args.pairs], [])
        self.emit(
            {
                "task": args.task,
                "mean": result.mean,
                "std": result.std,
                "coverage": in_vocab,
                "records": len(records),
                "folds": [
                    {
                        "fold": f.fold,
                        "dev_metric": f.dev_metric,
                        "test_metric": f.test_metric,
                        **f.config.to_dict(),
                    }
                    for f in result.folds
                ],
            },
            ctx,
        )
        return 0

    # === cluster ===

    def cluster(self, args: argparse.Namespace, ctx: RunContext) -> int:
        model = FlyModel.load(args.model)
        k = self._hash_length(args, ctx, model)
        C = args.clusters or ctx.config.get("evaluation.cluster_count")
        n_words = min(args.words or ctx.config.get("evaluation.cluster_words"), model.n_voc)
        word_ids = list(range(n_words))

        baseline = None
        if args.compare_vectors is not None:
            words, vectors = read_vectors(args.compare_vectors)
            row_of = {word: r for r, word in enumerate(words)}
            word_ids = [i for i in word_ids if model.vocab.tokens[i] in row_of]
            if not word_ids:
                raise EvaluationError("no clustered word has a vector in the comparison file")
            rows = [row_of[model.vocab.tokens[i]] for i in word_ids]
            baseline = binarize_topk(vectors[rows], k)
            logger.info("%d of %d words have comparison vectors", len(word_ids), n_words)
        if C > len(word_ids):
            raise ConfigurationError(f"cannot form {C} clusters from {len(word_ids)} words")

        codes = codes_to_dense(static_embeddings(model.weights, k)[word_ids], model.K)
        labels = agglomerative_cluster(codes, C)
        report = {
            "clusters": C,
            "k": k,
            "words": len(word_ids),
            "hash": cluster_quality(codes, labels).summary(),
        }
        if baseline is not None:
            report["baseline"] = cluster_quality(baseline, agglomerative_cluster(baseline, C)).summary()

        artifacts = []
        if args.output is not None:
            with open(args.output, "w", encoding="utf-8") as f:
                for i, label in zip(word_ids, labels, strict=True):
                    f.write(f"{model.vocab.tokens[i]}\t{int(label)}\n")
            artifacts.append(args.output)
            report["output"] = args.output
        self.write_manifest(args, ctx, [args.model, args.compare_vectors], artifacts)
        self.emit(report, ctx)
        return 0
