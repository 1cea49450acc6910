"""Command group loader with release profile support."""

import importlib.util
import json
import logging
from pathlib import Path
from typing import Any

from core.base_command import BaseCommand

logger = logging.getLogger(__name__)


class CommandLoader:
    """Load command groups based on release configuration.

    A release file in config/releases/ lists which groups under commands/
    are enabled. Each group lives in commands/<id>/command.py and defines one
    BaseCommand subclass.
    """

    COMMANDS_DIR = Path(__file__).parent.parent / "commands"
    RELEASES_DIR = Path(__file__).parent.parent / "config" / "releases"
    FALLBACK_RELEASE = "minimal"

    def __init__(self):
        self._loaded_commands: dict[str, BaseCommand] = {}
        self._release_config: dict[str, Any] | None = None

    def get_available_releases(self) -> list[str]:
        """Get list of available release configurations."""
        if not self.RELEASES_DIR.exists():
            return []
        return sorted(f.stem for f in self.RELEASES_DIR.glob("*.json"))

    def get_available_commands(self) -> list[str]:
        """Scan commands directory for available command groups."""
        groups = []
        if self.COMMANDS_DIR.exists():
            for d in self.COMMANDS_DIR.iterdir():
                if d.is_dir() and not d.name.startswith("_") and (d / "command.py").exists():
                    groups.append(d.name)
        return sorted(groups)

    def load_release_config(self, release_name: str) -> dict[str, Any]:
        """Load release configuration from config/releases/<name>.json."""
        config_path = self.RELEASES_DIR / f"{release_name}.json"
        if not config_path.exists():
            raise FileNotFoundError(f"Release config not found: {config_path}")

        with open(config_path, encoding="utf-8") as f:
            self._release_config = json.load(f)

        return self._release_config

    def resolve_release(self, release_name: str) -> tuple[str, dict[str, Any]]:
        """Load a release, falling back to the minimal one when it does not exist."""
        try:
            return release_name, self.load_release_config(release_name)
        except FileNotFoundError:
            logger.warning(
                "release %r not found, using %r", release_name, self.FALLBACK_RELEASE
            )
            return self.FALLBACK_RELEASE, self.load_release_config(self.FALLBACK_RELEASE)

    def load_command(self, command_id: str) -> BaseCommand | None:
        """Load a single command group by ID."""
        if command_id in self._loaded_commands:
            return self._loaded_commands[command_id]

        command_path = self.COMMANDS_DIR / command_id / "command.py"
        if not command_path.exists():
            logger.warning("command group not found: %s", command_id)
            return None

        try:
            spec = importlib.util.spec_from_file_location(
                f"commands.{command_id}.command", command_path
            )
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
        except Exception as e:
            logger.error("error loading command group %s: %s", command_id, e)
            return None

        command_class = None
        for name in dir(module):
            obj = getattr(module, name)
            if isinstance(obj, type) and issubclass(obj, BaseCommand) and obj is not BaseCommand:
                command_class = obj
                break

        if command_class is None:
            logger.warning("no command class found in %s", command_id)
            return None

        command = command_class()
        command.on_load()
        self._loaded_commands[command_id] = command
        logger.debug("loaded command group: %s (%s)", command.name, command_id)
        return command

    def load_release(self, release_name: str) -> list[BaseCommand]:
        """Load all enabled command groups of a release configuration."""
        config = self.load_release_config(release_name)
        commands = []

        for entry in config.get("commands", []):
            command_id = entry.get("id")
            if entry.get("enabled", True) and command_id:
                command = self.load_command(command_id)
                if command:
                    commands.append(command)

        return commands

    def unload_command(self, command_id: str) -> bool:
        """Unload a command group."""
        if command_id not in self._loaded_commands:
            return False

        command = self._loaded_commands.pop(command_id)
        command.on_unload()
        return True

    def get_loaded_commands(self) -> list[BaseCommand]:
        return list(self._loaded_commands.values())
