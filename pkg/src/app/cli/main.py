"""
命令列入口

mtd <subcommand> [--config FILE] [--seed N] [--set key=value ...] [--out PATH] [--verbose]
stdout 只輸出資料，診斷訊息寫入 stderr。
"""
from __future__ import annotations

import argparse
import sys
from typing import NoReturn, Sequence

from app.application.app import create_app, shutdown_container
from app.cli.command_discovery import register_commands
from app.cli.context import CommandContext
from app.cli.exit_codes import EXIT_OK, domain_error_line, load_exit_codes, unhandled_error_line
from app.config import load_run_config
from app.core.exceptions.base import DomainError
from app.core.exceptions.config import ConfigError


class CommandParser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they share the error line format."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"{self.prog}: {message}")


def common_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=str, help="TOML configuration file")
    parser.add_argument("--seed", type=int, help="root seed (overrides the configuration)")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration key, e.g. schedule.steps=50 (repeatable)",
    )
    parser.add_argument("--out", type=str, help="output artifact path")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    return parser


def build_parser() -> CommandParser:
    parser = CommandParser(prog="mtd", description="Discrete diffusion over motion tokens")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CommandParser)
    register_commands(subparsers, [common_options()])
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        load_exit_codes()
        args = build_parser().parse_args(argv)
        config = load_run_config(args.config, args.overrides, seed=args.seed)
        container = create_app(config, verbose=args.verbose)
        return args.handler(CommandContext(args=args, config=config, container=container)) or EXIT_OK
    except DomainError as exc:
        code, line = domain_error_line(exc)
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # noqa: BLE001
        code, line = unhandled_error_line(exc)
    finally:
        shutdown_container()
    print(line, file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
