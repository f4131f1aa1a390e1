import json
import re
import time
from pathlib import Path

import numpy as np
import pytest

from app.config import RunConfig
from app.core.domain.tokens import GenerationPlan, Segment
from app.core.services.codebook_service import decode_tokens, generate_synthetic_codebook
from app.core.services.dataset_service import make_dataset
from app.core.services.metrics_service import jerk
from app.core.services.sampling_service import Sampler
from app.infra.storage.manifest import manifest_path
from app.infra.storage.repositories.token_file_repository import TokenFileRepository
from tests.support.builders import random_model, small_codebook, small_config_args, small_transition

pytestmark = pytest.mark.integration

ERROR_LINE = re.compile(r'^error exit=(\d) code=([A-Z_]+) message="(.*)"$', re.MULTILINE)


def _error(stderr: str) -> tuple[int, str]:
    match = ERROR_LINE.search(stderr)
    assert match, stderr
    return int(match.group(1)), match.group(2)


def _fields(stdout: str) -> dict[str, str]:
    return dict(item.split("=", 1) for item in stdout.split())


@pytest.fixture
def pipeline(cli):
    """codebook → dataset → model in the working directory."""
    args = small_config_args()
    for command in ("make-codebook", "make-dataset", "train"):
        result = cli(command, *args)
        assert result.code == 0, result.stderr
    return args


def test_full_pipeline_writes_every_artifact_with_a_manifest(cli, pipeline, workdir):
    generated = cli("generate-multi", *pipeline, "--count", "5")
    assert generated.code == 0, generated.stderr
    assert _fields(generated.stdout) == {"records": "5", "boundaries": "6,12", "path": "runs/tokens.jsonl"}

    evaluated = cli("evaluate", *pipeline, "--reference", "runs/dataset.jsonl")
    assert evaluated.code == 0, evaluated.stderr
    metrics = {line.split()[0] for line in evaluated.stdout.splitlines()[1:]}
    assert metrics == {"diversity", "frechet_lite", "jerk_clip", "jerk_transition"}

    for artifact in ("codebook.txt", "dataset.jsonl", "model.txt", "tokens.jsonl", "tokens.eval.jsonl"):
        path = workdir / "runs" / artifact
        assert path.is_file(), artifact
        assert manifest_path(path).is_file(), artifact
    manifest = json.loads(manifest_path(workdir / "runs" / "tokens.jsonl").read_text(encoding="utf-8"))
    assert manifest["command"] == "generate-multi"
    assert manifest["details"]["T_s"] == 8
    assert len(manifest["config_digest"]) == 64


def test_training_reports_a_lower_final_loss(cli, workdir):
    args = small_config_args("training.epochs=40")
    assert cli("make-codebook", *args).code == 0
    assert cli("make-dataset", *args).code == 0

    trained = cli("train", *args)

    assert trained.code == 0, trained.stderr
    fields = _fields(trained.stdout)
    assert float(fields["final_loss"]) < float(fields["initial_loss"])


PIPELINE = ("make-codebook", "make-dataset", "train", "generate-multi", "evaluate")


def _run_pipeline_in(cli, monkeypatch, directory: Path, *args: str) -> tuple[dict[str, bytes], dict[str, str]]:
    """Run every stage inside ``directory``; artifacts by name (manifests excluded) and stdout by command."""
    directory.mkdir()
    monkeypatch.chdir(directory)
    stdout = {}
    for command in PIPELINE:
        result = cli(command, *args)
        assert result.code == 0, (command, result.stderr)
        stdout[command] = result.stdout
    artifacts = {
        p.name: p.read_bytes()
        for p in sorted((directory / "runs").iterdir())
        if not p.name.endswith(".manifest.json")
    }
    return artifacts, stdout


def test_identical_runs_write_byte_identical_artifacts(cli, workdir, monkeypatch):
    args = small_config_args("sampler.count=3")

    first, _ = _run_pipeline_in(cli, monkeypatch, workdir / "first", *args)
    second, _ = _run_pipeline_in(cli, monkeypatch, workdir / "second", *args)

    assert set(first) == {"codebook.txt", "dataset.jsonl", "model.txt", "tokens.jsonl", "tokens.eval.jsonl"}
    assert first == second


def test_default_configuration_end_to_end(cli, workdir, monkeypatch):
    args = ("--set", "training.progress=false")

    first, stdout = _run_pipeline_in(cli, monkeypatch, workdir / "first", *args)
    second, _ = _run_pipeline_in(cli, monkeypatch, workdir / "second", *args)

    assert first == second
    assert _fields(stdout["generate-multi"])["boundaries"] == "12,24,36"
    records = [json.loads(line) for line in first["tokens.eval.jsonl"].decode("utf-8").splitlines()]
    windows = [tuple(r["window"]) for r in records if r["metric"] == "jerk_transition"]
    assert windows == [(28, 68), (76, 116), (124, 164)]
    assert all(np.isfinite(r["value"]) for r in records)
    manifest = json.loads(manifest_path(workdir / "second" / "runs" / "tokens.jsonl").read_text(encoding="utf-8"))
    assert manifest["details"]["T_s"] == 90


def test_default_dataset_decodes_to_finite_jerk():
    config = RunConfig()
    cb = generate_synthetic_codebook(
        K=config.codebook.size, D=config.codebook.dim, clusters=config.codebook.clusters, seed=config.seed
    )
    records = make_dataset(
        cb,
        conditions=config.dataset.conditions,
        sequences_per_condition=config.dataset.sequences_per_condition,
        length=config.dataset.sequence_length,
        seed=config.seed,
    )

    reports = [jerk(decode_tokens(r.tokens, cb, config.metrics.fps)) for r in records]

    assert len(reports) == 100
    assert all(np.isfinite(r.total) and np.all(np.isfinite(r.per_joint)) for r in reports)


def test_generation_is_reproducible_per_seed(cli, pipeline, workdir):
    cli("generate", *pipeline, "--seed", "4", "--count", "3", "--out", "a.jsonl")
    cli("generate", *pipeline, "--seed", "4", "--count", "3", "--out", "b.jsonl")
    cli("generate", *pipeline, "--seed", "5", "--count", "3", "--out", "c.jsonl")

    repo = TokenFileRepository()
    a, b, c = (repo.load(workdir / name) for name in ("a.jsonl", "b.jsonl", "c.jsonl"))
    assert all(x.sequence.same_as(y.sequence) for x, y in zip(a, b, strict=True))
    assert not all(x.sequence.same_as(y.sequence) for x, y in zip(a, c, strict=True))


def test_corrupt_and_profile(cli, pipeline, workdir):
    assert cli("generate-multi", *pipeline, "--plan", "1:4,2:4").code == 0

    corrupted = cli("corrupt", *pipeline, "--step", "12")
    profiled = cli("profile", *pipeline, "--index", "0")

    assert corrupted.code == 0, corrupted.stderr
    assert _fields(corrupted.stdout)["path"] == "runs/tokens.t12.jsonl"
    (record,) = TokenFileRepository().load(workdir / "runs" / "tokens.t12.jsonl")
    assert record.step == 12
    assert record.source is not None
    assert profiled.code == 0, profiled.stderr
    rows = profiled.stdout.splitlines()
    assert rows[0].split() == ["frame", "time", "mean_speed", "mean_jerk", "boundary"]
    assert len(rows) == 1 + 8 * 4
    assert [int(r.split()[0]) for r in rows[1:] if r.split()[-1] == "1"] == [16]


def test_matrix_audit_prints_one_row_per_step(cli, pipeline):
    single = cli("matrix-audit", *pipeline)
    multi = cli("matrix-audit", *pipeline, "--multi")

    assert single.code == 0 and multi.code == 0
    assert len(single.stdout.splitlines()) == 1 + 12
    assert single.stdout != multi.stdout


def test_missing_input_exits_with_io_error(cli):
    result = cli("make-dataset", *small_config_args())

    assert result.code == 2
    assert _error(result.stderr) == (2, "IO_ERROR")
    assert result.stdout == ""


def test_malformed_artifact_exits_with_format_error(cli, workdir):
    (workdir / "runs").mkdir()
    (workdir / "runs" / "codebook.txt").write_text("codebook v9\n", encoding="utf-8")

    result = cli("make-dataset", *small_config_args())

    assert _error(result.stderr) == (2, "ARTIFACT_FORMAT")


@pytest.mark.parametrize(
    "argv",
    [
        ("make-codebook", "--set", "schedule.nope=1"),
        ("make-codebook", "--set", "no-equals-sign"),
        ("make-codebook", "--set", "sampler.independent_from=500"),
        ("no-such-command",),
        ("corrupt",),
    ],
)
def test_configuration_and_usage_errors_exit_with_one(cli, argv):
    result = cli(*argv)

    assert result.code == 1
    assert _error(result.stderr) == (1, "CONFIG_ERROR")


def test_model_trained_for_other_steps_exits_with_three(cli, pipeline):
    result = cli("generate-multi", *pipeline, "--set", "schedule.steps=10")

    assert result.code == 3
    assert _error(result.stderr) == (3, "INVALID_PARAMETER")
    assert "trained for" in result.stderr


def test_evaluating_masked_tokens_exits_with_three(cli, pipeline):
    assert cli("generate", *pipeline).code == 0
    assert cli("corrupt", *pipeline, "--step", "12", "--out", "runs/noisy.jsonl").code == 0

    result = cli("evaluate", *pipeline, "--tokens", "runs/noisy.jsonl")

    assert _error(result.stderr) == (3, "INVALID_STATE")


def _timed(sampler: Sampler, plan: GenerationPlan, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        sampler.generate_multi(plan)
        best = min(best, time.perf_counter() - start)
    return best


def test_two_phase_runtime_grows_near_linearly_in_segments():
    transition = small_transition(small_codebook(K=16, D=4), T=40)
    sampler = Sampler(transition, random_model(transition, V=2, B=8))

    def plan(n: int) -> GenerationPlan:
        segments = tuple(Segment(condition=i % 2 + 1, length=24) for i in range(n))
        return GenerationPlan(segments=segments, independent_from=20, guidance_scale=2.0, seed=0)

    _timed(sampler, plan(2), repeats=1)
    ratio = _timed(sampler, plan(8)) / _timed(sampler, plan(2))

    assert ratio <= 5.0
    assert np.isfinite(ratio)
