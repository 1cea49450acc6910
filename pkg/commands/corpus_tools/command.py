"""Corpus Tools - sentence splitting and vocabulary building."""

import argparse
import logging
from pathlib import Path

from core.base_command import BaseCommand, RunContext
from core.corpus import build_vocabulary_from_files, iter_lines, split_sentences

logger = logging.getLogger(__name__)


class CorpusToolsCommand(BaseCommand):
    """Turns raw text into the sentence-per-line corpus and its vocabulary.

    Subcommands:
    - preprocess: concatenate files and split paragraphs into sentences
    - vocab: count tokens and keep the most frequent ones
    """

    def __init__(self):
        super().__init__()
        self.id = "corpus_tools"
        self.name = "Corpus Tools"
        self.description = "Sentence splitting and vocabulary building"
        self.version = "1.0.0"

    def register(self, subparsers: argparse._SubParsersAction) -> None:
        p = subparsers.add_parser(
            "preprocess",
            help="Concatenate text files into a sentence-per-line corpus",
            description="Each input line is a paragraph; it is split after '.', '?' or '!' "
            "followed by whitespace.",
        )
        p.add_argument("inputs", nargs="+", type=Path, help="UTF-8 text files")
        p.add_argument("-o", "--output", type=Path, required=True, help="Corpus file to write")
        p.set_defaults(handler=self.preprocess)

        p = subparsers.add_parser("vocab", help="Build the vocabulary of a corpus")
        p.add_argument("corpus", nargs="+", type=Path, help="Sentence-per-line corpus file(s)")
        p.add_argument("--vocab-size", type=int, default=None, help="Vocabulary size N_voc")
        p.add_argument("-o", "--output", type=Path, required=True, help="Vocabulary TSV to write")
        p.set_defaults(handler=self.vocab)

    def preprocess(self, args: argparse.Namespace, ctx: RunContext) -> int:
        count = 0
        with open(args.output, "w", encoding="utf-8") as out:
            for paragraph in iter_lines(args.inputs):
                for sentence in split_sentences(paragraph):
                    out.write(sentence + "\n")
                    count += 1
        if count == 0:
            logger.warning("input contains no text, wrote empty corpus %s", args.output)
        self.write_manifest(args, ctx, args.inputs, [args.output])
        self.emit({"sentences": count, "output": args.output}, ctx)
        return 0

    def vocab(self, args: argparse.Namespace, ctx: RunContext) -> int:
        n_voc = args.vocab_size or ctx.config.get("training.n_voc")
        vocab = build_vocabulary_from_files(args.corpus, n_voc, ctx.workers)
        vocab.save(args.output)
        logger.info("vocabulary of %d tokens written to %s", vocab.n_voc, args.output)
        self.write_manifest(args, ctx, args.corpus, [args.output])
        self.emit(
            {"tokens": vocab.n_voc, "total_count": int(vocab.counts.sum()), "output": args.output},
            ctx,
        )
        return 0
