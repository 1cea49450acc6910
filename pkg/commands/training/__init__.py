"""Training - Fit Kenyon-cell weights and benchmark epoch cost."""

from .command import TrainingCommand

__all__ = ["TrainingCommand"]
