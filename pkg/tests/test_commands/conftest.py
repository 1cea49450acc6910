"""Fixtures for running command handlers without the full CLI."""

import argparse
import io
import json

import pytest


@pytest.fixture
def command_ctx(isolated_config):
    from core.base_command import RunContext
    from core.config_manager import ConfigManager

    return RunContext(config=ConfigManager(), workers=1, version="test", out=io.StringIO())


@pytest.fixture
def run(command_ctx):
    """Parse argv with one command group's subparsers and call the handler.

    Returns the exit code and the JSON report.
    """

    def _run(command, argv):
        parser = argparse.ArgumentParser()
        command.register(parser.add_subparsers(dest="command", required=True))
        args = parser.parse_args([str(a) for a in argv])
        command_ctx.out = io.StringIO()
        code = args.handler(args, command_ctx)
        return code, json.loads(command_ctx.out.getvalue())

    return _run


@pytest.fixture
def corpus_file(temp_dir, synthetic_lines):
    path = temp_dir / "corpus.txt"
    path.write_text("\n".join(synthetic_lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def random_model_file(temp_dir, random_model):
    path = temp_dir / "random.flyw"
    random_model.save(path)
    return path
