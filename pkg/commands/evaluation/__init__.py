"""Evaluation - Word similarity, word in context and clustering reports."""

from .command import EvaluationCommand

__all__ = ["EvaluationCommand"]
