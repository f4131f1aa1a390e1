"""Shared step definitions for pytest-bdd."""
from pytest_bdd import parsers, then

from tests.support.context import ScenarioContext


@then(parsers.parse("應拋出 {error}"))
def assert_raised(context: ScenarioContext, error: str) -> None:
    assert context.exception is not None, "no error was raised"
    assert type(context.exception).__name__ == error
