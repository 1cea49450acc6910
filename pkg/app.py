#!/usr/bin/env python3
"""flyhash - sparse binary word embeddings from a Kenyon-cell network.

Usage:
    python app.py preprocess raw/*.txt -o corpus.txt
    python app.py vocab corpus.txt --vocab-size 20000 -o vocab.tsv
    python app.py train corpus.txt --vocab vocab.tsv --K 400 --w 11 -o model.flyw
    python app.py neighbors model.flyw bank -k 51 -q 10
    python app.py --release minimal --help

Environment Variables:
    FLYHASH_RELEASE: Override release selection
    FLYHASH_WORKERS: Default for --workers
"""

import argparse
import json
import logging
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core import __version__
from core.base_command import RunContext
from core.command_loader import CommandLoader
from core.config_manager import ConfigManager
from core.errors import FlyhashError

logger = logging.getLogger("flyhash")

LOG_FORMAT = "[%(name)s] %(levelname)s: %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def error_json(error: str, message: str) -> str:
    return json.dumps({"error": error, "message": message})


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors are the same JSON object as command failures."""

    def error(self, message: str):
        self.exit(2, error_json("UsageError", f"{self.prog}: {message}") + "\n")


def _add_global_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--release",
        "-r",
        default="",
        help="Release configuration to load (full, minimal)",
    )
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None, help="Logging level")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Shortcut for --log-level DEBUG"
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Parallel workers (default: FLYHASH_WORKERS, then config, then all cores)",
    )
    parser.add_argument(
        "--manifest", type=Path, default=None, help="Manifest path for commands without outputs"
    )
    parser.add_argument(
        "--format", dest="output_format", choices=("json", "table"), default="json"
    )


def build_parser(release: str, loader: CommandLoader | None = None) -> argparse.ArgumentParser:
    """Parser with the subcommands of every command group the release enables."""
    loader = loader or CommandLoader()
    actual_release, release_config = loader.resolve_release(release)

    parser = CliParser(
        prog="flyhash",
        description=f"flyhash {__version__} - {release_config.get('name', actual_release)}",
    )
    _add_global_arguments(parser)
    parser.add_argument("--version", action="version", version=f"flyhash {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    commands = loader.load_release(actual_release)
    for command in commands:
        command.register(subparsers)
    logger.debug("release %s: %d command group(s)", actual_release, len(commands))
    return parser


def setup_logging(level: str) -> None:
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    config = ConfigManager()

    # Globals decide which commands exist, so read them before the full parse.
    pre = CliParser(prog="flyhash", add_help=False)
    _add_global_arguments(pre)
    early, _ = pre.parse_known_args(argv)
    level = "DEBUG" if early.verbose else early.log_level or config.get("runtime.log_level", "INFO")
    setup_logging(level)

    release = early.release or config.get_release()
    args = build_parser(release).parse_args(argv)

    try:
        if args.workers is not None:
            config.set("runtime.workers", args.workers)
        ctx = RunContext(
            config=config,
            workers=config.get_workers(),
            version=__version__,
            output_format=args.output_format,
            manifest=args.manifest,
        )
        return args.handler(args, ctx)
    except (FlyhashError, OSError, UnicodeDecodeError) as e:
        logger.debug("command failed", exc_info=True)
        print(error_json(type(e).__name__, str(e)), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
