"""Auto-discover DomainError exit-code mappings and render CLI error lines."""

from __future__ import annotations

import importlib
import inspect
import logging
import os
import pkgutil
import traceback
from functools import lru_cache

from app.core.exceptions.base import DomainError

logger = logging.getLogger(__name__)

EXCEPTIONS_PACKAGE = "app.cli.exceptions"
CORE_EXCEPTIONS_PACKAGE = "app.core.exceptions"

EXIT_OK = 0
EXIT_INTERNAL = 3
INTERNAL_ERROR_CODE = "INTERNAL_ERROR"


def discover_mappings() -> dict[type[DomainError], int]:
    """Import mapping modules under EXCEPTIONS_PACKAGE and merge EXIT_CODE_MAPPINGS."""
    package = importlib.import_module(EXCEPTIONS_PACKAGE)
    mappings: dict[type[DomainError], int] = {}
    registered_names: list[str] = []

    for module_info in sorted(pkgutil.iter_modules(package.__path__), key=lambda m: m.name):
        if module_info.name.startswith("_"):
            continue

        module = importlib.import_module(f"{EXCEPTIONS_PACKAGE}.{module_info.name}")
        module_mappings = getattr(module, "EXIT_CODE_MAPPINGS", None)
        if module_mappings is None:
            continue
        if not isinstance(module_mappings, dict):
            raise RuntimeError(
                f"{EXCEPTIONS_PACKAGE}.{module_info.name}.EXIT_CODE_MAPPINGS must be a dict"
            )

        for exc_type, exit_code in module_mappings.items():
            if exc_type in mappings:
                raise RuntimeError(
                    f"Duplicate exit code mapping for {exc_type.__name__}: "
                    f"{mappings[exc_type]} and {exit_code}"
                )
            if not isinstance(exit_code, int) or not 1 <= exit_code <= 3:
                raise RuntimeError(f"Exit code for {exc_type.__name__} must be 1, 2 or 3")
            mappings[exc_type] = exit_code

        registered_names.append(module_info.name)

    for name in registered_names:
        logger.debug("exit code mappings registered module=%s", name)

    return mappings


def discover_domain_error_types() -> list[type[DomainError]]:
    """Scan core/exceptions/ for concrete DomainError subclasses."""
    package = importlib.import_module(CORE_EXCEPTIONS_PACKAGE)
    types: list[type[DomainError]] = []

    for module_info in sorted(pkgutil.iter_modules(package.__path__), key=lambda m: m.name):
        if module_info.name.startswith("_") or module_info.name == "base":
            continue

        module = importlib.import_module(f"{CORE_EXCEPTIONS_PACKAGE}.{module_info.name}")
        for _, obj in inspect.getmembers(module, inspect.isclass):
            if (
                issubclass(obj, DomainError)
                and obj is not DomainError
                and obj.__module__ == module.__name__
            ):
                types.append(obj)

    return types


def validate_mappings(
    mappings: dict[type[DomainError], int],
    types: list[type[DomainError]],
) -> None:
    """Fail fast when a DomainError subclass lacks an exit code."""
    missing = [exc_type for exc_type in types if exc_type not in mappings]
    if missing:
        names = ", ".join(exc_type.__name__ for exc_type in sorted(missing, key=lambda t: t.__name__))
        raise RuntimeError(f"Missing exit code mappings for DomainError subclasses: {names}")


@lru_cache(maxsize=1)
def load_exit_codes() -> dict[type[DomainError], int]:
    mappings = discover_mappings()
    validate_mappings(mappings, discover_domain_error_types())
    return mappings


def exit_code_for(exc: DomainError) -> int:
    mappings = load_exit_codes()
    for klass in type(exc).__mro__:
        if klass in mappings:
            return mappings[klass]
    return EXIT_INTERNAL


def _quote(text: str) -> str:
    return '"' + " ".join(text.split()).replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_error(exit_code: int, error_code: str, message: str) -> str:
    """Single machine-parseable line: ``error exit=<n> code=<CODE> message="..."``."""
    return f"error exit={exit_code} code={error_code} message={_quote(message)}"


def domain_error_line(exc: DomainError) -> tuple[int, str]:
    code = exit_code_for(exc)
    for detail in exc.errors:
        logger.debug("error detail %s", detail.render())
    return code, format_error(code, exc.error_code, exc.message)


def unhandled_error_line(exc: Exception) -> tuple[int, str]:
    if os.getenv("DEBUG", "false").lower() == "true":
        traceback.print_exc()
    return EXIT_INTERNAL, format_error(EXIT_INTERNAL, INTERNAL_ERROR_CODE, f"{type(exc).__name__}: {exc}")
