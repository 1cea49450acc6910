"""Embedding - Hash codes, neighbours and unit probing."""

from .command import EmbeddingCommand

__all__ = ["EmbeddingCommand"]
