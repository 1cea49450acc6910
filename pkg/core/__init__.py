"""flyhash core: corpus, Kenyon-cell model, trainer, evaluation and CLI plumbing."""

__version__ = "0.1.0"

from core.base_command import BaseCommand, RunContext
from core.command_loader import CommandLoader
from core.config_manager import ConfigManager

__all__ = ["BaseCommand", "CommandLoader", "ConfigManager", "RunContext", "__version__"]
