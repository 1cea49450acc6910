"""Base class for all CLI command groups."""

import argparse
import json
import logging
import math
import sys
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from core.config_manager import ConfigManager
from core.manifest import RunManifest, manifest_path_for

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    """Shared state handed to every command handler."""

    config: ConfigManager
    workers: int
    version: str
    output_format: str = "json"
    manifest: Path | None = None
    out: Any = None


def _clean(value: Any) -> Any:
    """Make a report JSON-safe: non-finite floats become null."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_clean(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


class BaseCommand(ABC):
    """Abstract base class for command groups.

    A command group registers one or more subcommands on the CLI parser and
    handles them. Every subparser must set a ``handler`` default taking
    (args, ctx) and returning an exit code.
    """

    def __init__(self):
        self.id: str = self.__class__.__name__.lower().replace("command", "")
        self.name: str = "Unnamed Command Group"
        self.description: str = ""
        self.version: str = "1.0.0"

    @abstractmethod
    def register(self, subparsers: argparse._SubParsersAction) -> None:
        """Add this group's subcommands to the CLI."""

    def on_load(self) -> None:
        """Called when the group is loaded. Override for initialization."""

    def on_unload(self) -> None:
        """Called when the group is unloaded. Override for cleanup."""

    def get_info(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "version": self.version,
        }

    # === Helpers for handlers ===

    @staticmethod
    def resolved_config(args: argparse.Namespace) -> dict[str, Any]:
        """All parsed arguments except the handler itself."""
        return _clean({k: v for k, v in vars(args).items() if k != "handler"})

    def write_manifest(
        self,
        args: argparse.Namespace,
        ctx: RunContext,
        inputs: list,
        artifacts: list,
        seed: int | None = None,
    ) -> Path | None:
        """Write a RunManifest next to the first artifact, or to --manifest."""
        if artifacts:
            path = manifest_path_for(artifacts[0])
        elif ctx.manifest is not None:
            path = ctx.manifest
        else:
            return None
        manifest = RunManifest.for_inputs(
            args.command,
            self.resolved_config(args),
            inputs,
            seed=seed,
            artifacts=[str(a) for a in artifacts],
            version=ctx.version,
        )
        manifest.write(path)
        logger.debug("manifest written to %s", path)
        return path

    @staticmethod
    def emit(report: dict[str, Any], ctx: RunContext) -> None:
        """Print a report as JSON, or as a plain key/value table."""
        report = _clean(report)
        out = ctx.out or sys.stdout
        if ctx.output_format == "json":
            print(json.dumps(report, indent=2, ensure_ascii=False), file=out)
            return
        for key, value in report.items():
            if isinstance(value, list) and value and isinstance(value[0], dict):
                print(f"{key}:", file=out)
                columns = list(value[0].keys())
                print("  " + "\t".join(columns), file=out)
                for row in value:
                    print("  " + "\t".join(str(row.get(c, "")) for c in columns), file=out)
            else:
                print(f"{key}: {value}", file=out)
