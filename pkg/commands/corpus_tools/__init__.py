"""Corpus Tools - Sentence splitting and vocabulary building."""

from .command import CorpusToolsCommand

__all__ = ["CorpusToolsCommand"]
