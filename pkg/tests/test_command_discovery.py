import argparse

import pytest

from app.cli.command_discovery import discover_command_modules
from app.cli.commands import codebook_commands, sampling_commands
from app.cli.main import build_parser
from app.core.exceptions.config import ConfigError

SUBCOMMANDS = {
    "make-codebook",
    "make-dataset",
    "train",
    "corrupt",
    "matrix-audit",
    "generate",
    "generate-multi",
    "evaluate",
    "profile",
}


def _subcommands(parser: argparse.ArgumentParser) -> set[str]:
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return set(action.choices)


def test_discover_command_modules_includes_command_modules():
    modules = discover_command_modules()

    assert codebook_commands in modules
    assert sampling_commands in modules
    assert all(callable(m.register) for m in modules)


def test_parser_registers_every_subcommand_without_manual_wiring():
    assert _subcommands(build_parser()) == SUBCOMMANDS


def test_every_subcommand_accepts_the_common_options():
    parser = build_parser()

    for name in sorted(SUBCOMMANDS):
        extra = ["--step", "2"] if name == "corrupt" else []
        args = parser.parse_args([name, *extra, "--seed", "3", "--set", "schedule.steps=5", "--out", "x", "--verbose"])
        assert args.seed == 3
        assert args.overrides == ["schedule.steps=5"]
        assert args.verbose is True
        assert callable(args.handler)


def test_usage_errors_become_config_errors():
    with pytest.raises(ConfigError):
        build_parser().parse_args(["no-such-command"])
    with pytest.raises(ConfigError):
        build_parser().parse_args(["generate", "--length", "many"])
