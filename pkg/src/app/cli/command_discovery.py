"""Auto-discover CLI subcommand modules from app.cli.commands."""

from __future__ import annotations

import argparse
import importlib
import logging
import pkgutil
from types import ModuleType

logger = logging.getLogger(__name__)

COMMANDS_PACKAGE = "app.cli.commands"
COMMAND_MODULE_SUFFIX = "_commands"


def discover_command_modules() -> list[ModuleType]:
    """Import ``*_commands`` modules under COMMANDS_PACKAGE that expose ``register``."""
    package = importlib.import_module(COMMANDS_PACKAGE)
    modules: list[ModuleType] = []

    for module_info in sorted(pkgutil.iter_modules(package.__path__), key=lambda m: m.name):
        if module_info.name.startswith("_") or not module_info.name.endswith(COMMAND_MODULE_SUFFIX):
            continue

        module = importlib.import_module(f"{COMMANDS_PACKAGE}.{module_info.name}")
        if callable(getattr(module, "register", None)):
            modules.append(module)
            logger.debug("command module registered: %s", module_info.name)

    return modules


def register_commands(
    subparsers: argparse._SubParsersAction,
    parents: list[argparse.ArgumentParser],
) -> None:
    """Let every discovered module add its subcommands."""
    for module in discover_command_modules():
        module.register(subparsers, parents)
