#!/usr/bin/env python3
"""
Make Synthetic Corpus - Write a corpus whose sentences each use one topic's words.

Usage:
    python make_synthetic_corpus.py -o synthetic.txt [--sentences N] [--topic-size N] [--seed N]

The topic word lists are written next to the corpus as <output>.topics.tsv
(word<TAB>topic) so tests and notebooks can check topic separation.
"""

import argparse
import sys
from pathlib import Path

# Find project root (where core/ is located)
SCRIPT_DIR = Path(__file__).parent
PROJECT_DIR = SCRIPT_DIR.parent
sys.path.insert(0, str(PROJECT_DIR))

from core.synthetic import two_topic_corpus  # noqa: E402


def write_corpus(output: Path, lines: list[str], topics: list[list[str]]) -> Path:
    """Write the sentences and the word-to-topic table; returns the table path."""
    with open(output, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")
    topics_path = output.with_name(output.name + ".topics.tsv")
    with open(topics_path, "w", encoding="utf-8") as f:
        for t, words in enumerate(topics):
            for word in words:
                f.write(f"{word}\t{t}\n")
    return topics_path


def main():
    parser = argparse.ArgumentParser(description="Generate a synthetic multi-topic corpus")
    parser.add_argument("-o", "--output", type=Path, required=True, help="Corpus file to write")
    parser.add_argument("--sentences", type=int, default=100000, help="Number of sentences")
    parser.add_argument("--topic-size", type=int, default=50, help="Words per topic")
    parser.add_argument("--topics", type=int, default=2, help="Number of topics")
    parser.add_argument("--sentence-length", type=int, default=12, help="Tokens per sentence")
    parser.add_argument("--seed", type=int, default=0, help="Generator seed")
    parser.add_argument("--quiet", "-q", action="store_true", help="Minimal output")

    args = parser.parse_args()

    if args.sentences < 1 or args.topic_size < 1 or args.topics < 1:
        print("[ERROR] --sentences, --topic-size and --topics must be >= 1")
        sys.exit(1)

    lines, topics = two_topic_corpus(
        args.sentences,
        topic_size=args.topic_size,
        sentence_length=args.sentence_length,
        seed=args.seed,
        n_topics=args.topics,
    )
    topics_path = write_corpus(args.output, lines, topics)

    if not args.quiet:
        print(f"Corpus: {args.output} ({len(lines)} sentences)")
        print(f"Topics: {topics_path} ({args.topics} x {args.topic_size} words)")


if __name__ == "__main__":
    main()
