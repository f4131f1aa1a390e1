import logging
from dataclasses import dataclass
from typing import Callable

import pytest

from app.cli.main import run
from app.infra.containers import shutdown_container
from tests.support.context import ScenarioContext


@pytest.fixture
def context() -> ScenarioContext:
    ctx = ScenarioContext()
    yield ctx
    ctx.run_cleanups()


@pytest.fixture(autouse=True)
def fresh_container():
    """Every test starts and ends without a global container."""
    shutdown_container()
    yield
    shutdown_container()


@dataclass
class CliResult:
    code: int
    stdout: str
    stderr: str


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("DEBUG", raising=False)
    return tmp_path


@pytest.fixture
def root_logging():
    """configure_logging replaces the root handlers; put the originals back."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield root
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def cli(workdir, capsys, root_logging) -> Callable[..., CliResult]:
    """Run ``mtd`` in-process inside an empty working directory."""
    def invoke(*argv: str) -> CliResult:
        capsys.readouterr()
        code = run(list(argv))
        captured = capsys.readouterr()
        return CliResult(code=code, stdout=captured.out, stderr=captured.err)

    return invoke
