"""Training - fit Kenyon-cell weights on a corpus, and time epochs."""

import argparse
import logging
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from core.base_command import BaseCommand, RunContext
from core.corpus import (
    SampleSet,
    Vocabulary,
    build_vocabulary_from_files,
    encode_corpus,
    iter_lines,
    read_sample_cache,
    write_sample_cache,
)
from core.errors import ConfigurationError, DimensionMismatchError
from core.model import FlyModel
from core.trainer import (
    EpochReport,
    Trainer,
    TrainingConfig,
    benchmark_scaling,
    probabilities_for,
)

logger = logging.getLogger(__name__)

METRICS_SUFFIX = ".metrics.jsonl"


def checkpoint_name(epochs_done: int) -> str:
    return f"model.epoch{epochs_done:02d}.flyw"


def _add_hyperparameters(p: argparse.ArgumentParser) -> None:
    """Flags shared by train and bench; unset flags fall back to the config file."""
    p.add_argument("--K", type=int, default=None, help="Number of Kenyon cells")
    p.add_argument("--w", type=int, default=None, help="W-gram window size (odd)")
    p.add_argument("--lr0", type=float, default=None, help="Initial learning rate")
    p.add_argument("--batch", type=int, default=None, help="Minibatch size")
    p.add_argument("--seed", type=int, default=None, help="Seed for initialization and shuffles")


class TrainingCommand(BaseCommand):
    """Training and scaling benchmark.

    Subcommands:
    - train: vocabulary, encoding and the epoch schedule, with checkpoints
    - bench: epoch time over a grid of K, vocabulary sizes and sample counts
    """

    def __init__(self):
        super().__init__()
        self.id = "training"
        self.name = "Training"
        self.description = "Fit Kenyon-cell weights and benchmark epoch cost"
        self.version = "1.0.0"

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        p = subparsers.add_parser("train", help="Train a model on a sentence-per-line corpus")
        p.add_argument("corpus", nargs="+", type=Path, help="Corpus file(s)")
        p.add_argument("-o", "--output", type=Path, required=True, help="Model file to write")
        p.add_argument("--vocab", type=Path, default=None, help="Vocabulary TSV (built if absent)")
        p.add_argument("--vocab-size", type=int, default=None, help="Vocabulary size N_voc")
        _add_hyperparameters(p)
        p.add_argument("--epochs", type=int, default=None, help="Number of epochs")
        p.add_argument("--probe-size", type=int, default=None, help="Samples in the energy probe")
        p.add_argument(
            "--no-reweight",
            dest="reweight",
            action="store_const",
            const=False,
            default=None,
            help="Uniform word probabilities (spherical K-means)",
        )
        p.add_argument("--cache", type=Path, default=None, help="Encoded-sample cache file")
        p.add_argument("--checkpoint-dir", type=Path, default=None, help="Write a model per epoch")
        p.add_argument("--resume", type=Path, default=None, help="Continue from a checkpoint")
        p.add_argument(
            "--metrics", type=Path, default=None, help=f"Epoch log (default: <output>{METRICS_SUFFIX})"
        )
        p.set_defaults(handler=self.train)

        p = subparsers.add_parser("bench", help="Time one epoch over a parameter grid")
        p.add_argument("corpus", nargs="+", type=Path, help="Corpus file(s)")
        p.add_argument("--Ks", type=int, nargs="+", required=True, help="Kenyon cell counts")
        p.add_argument("--vocab-sizes", type=int, nargs="+", required=True, help="N_voc values")
        p.add_argument("--samples", type=int, nargs="+", required=True, help="Sample counts")
        _add_hyperparameters(p)
        p.set_defaults(handler=self.bench)

    # === train ===

    @staticmethod
    def _config(args: argparse.Namespace, ctx: RunContext, **extra) -> TrainingConfig:
        return ctx.config.training_config(
            K=args.K,
            w=args.w,
            lr0=args.lr0,
            batch_size=args.batch,
            seed=args.seed,
            workers=ctx.workers,
            **extra,
        )

    @staticmethod
    def _match_checkpoint(args: argparse.Namespace, cfg: TrainingConfig, model: FlyModel):
        """Resuming keeps the checkpoint's architecture and seed; explicit flags must agree."""
        stored = {"K": model.K, "w": model.w, "seed": model.seed, "vocab_size": model.n_voc}
        for flag, value in stored.items():
            given = getattr(args, flag)
            if given is not None and given != value:
                raise ConfigurationError(
                    f"--{flag.replace('_', '-')} {given} conflicts with checkpoint value {value}"
                )
        return replace(cfg, K=model.K, w=model.w, seed=model.seed, n_voc=model.n_voc)

    @staticmethod
    def _samples(args, ctx: RunContext, vocab: Vocabulary, w: int) -> SampleSet:
        if args.cache is not None and args.cache.exists():
            samples = read_sample_cache(args.cache)
            if (samples.n_voc, samples.w) != (vocab.n_voc, w):
                raise DimensionMismatchError(
                    f"cache {args.cache} has N_voc={samples.n_voc}, w={samples.w}; "
                    f"expected N_voc={vocab.n_voc}, w={w}"
                )
            logger.info("read %d encoded samples from %s", len(samples), args.cache)
            return samples
        samples = encode_corpus(iter_lines(args.corpus), vocab, w, ctx.workers)
        if args.cache is not None:
            write_sample_cache(args.cache, samples)
            logger.info("wrote sample cache %s", args.cache)
        return samples

    def train(self, args: argparse.Namespace, ctx: RunContext) -> int:
        cfg = self._config(
            args,
            ctx,
            n_voc=args.vocab_size,
            epochs=args.epochs,
            probe_size=args.probe_size,
            reweight=args.reweight,
        )

        start, weights = 0, None
        if args.resume is not None:
            checkpoint = FlyModel.load(args.resume)
            cfg = self._match_checkpoint(args, cfg, checkpoint).validate()
            vocab, weights, start = checkpoint.vocab, checkpoint.weights, checkpoint.epochs_trained
            logger.info("resuming from %s after epoch %d", args.resume, start)
        elif args.vocab is not None:
            vocab = Vocabulary.load(args.vocab)
            cfg = replace(cfg, n_voc=vocab.n_voc).validate()
        else:
            vocab = build_vocabulary_from_files(args.corpus, cfg.n_voc, ctx.workers)
            cfg = replace(cfg, n_voc=vocab.n_voc).validate()

        samples = self._samples(args, ctx, vocab, cfg.w)
        metrics_path = args.metrics or Path(f"{args.output}{METRICS_SUFFIX}")
        if args.checkpoint_dir is not None:
            args.checkpoint_dir.mkdir(parents=True, exist_ok=True)

        with open(metrics_path, "a" if start else "w", encoding="utf-8") as metrics:

            def on_epoch_end(report: EpochReport, W: np.ndarray) -> None:
                metrics.write(report.to_json() + "\n")
                metrics.flush()
                if args.checkpoint_dir is not None:
                    path = args.checkpoint_dir / checkpoint_name(report.epoch + 1)
                    FlyModel(W, vocab, cfg.w, cfg.seed, report.epoch + 1).save(path)

            W, reports = Trainer(cfg, probabilities_for(vocab, cfg), on_epoch_end).fit(
                samples, weights=weights, start_epoch=start
            )

        model = FlyModel(W, vocab, cfg.w, cfg.seed, cfg.epochs)
        model.save(args.output)

        inputs = [*args.corpus, args.vocab, args.resume]
        self.write_manifest(args, ctx, inputs, [args.output, metrics_path], seed=cfg.seed)
        self.emit(
            {
                "output": args.output,
                "K": model.K,
                "n_voc": model.n_voc,
                "w": model.w,
                "samples": len(samples),
                "epochs": model.epochs_trained,
                "final_energy": reports[-1].energy,
                "epochs_log": [asdict(r) for r in reports],
            },
            ctx,
        )
        return 0

    # === bench ===

    def bench(self, args: argparse.Namespace, ctx: RunContext) -> int:
        base = self._config(args, ctx, epochs=1)
        lines = list(iter_lines(args.corpus))
        rows = benchmark_scaling(lines, base, args.Ks, args.vocab_sizes, args.samples)
        self.write_manifest(args, ctx, args.corpus, [], seed=base.seed)
        self.emit({"rows": [asdict(r) for r in rows]}, ctx)
        return 0
