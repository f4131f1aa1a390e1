import pytest

from app.config import RunConfig, config_digest, load_run_config, parse_override
from app.core.exceptions.common import ArtifactIOError
from app.core.exceptions.config import ConfigError


@pytest.fixture
def toml_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        "seed = 3\n"
        "[schedule]\n"
        "steps = 40\n"
        "eta_single = 0.7\n"
        "[sampler]\n"
        "independent_from = 30\n",
        encoding="utf-8",
    )
    return path


def test_defaults_load_without_any_source(workdir):
    config = load_run_config()

    assert config == RunConfig()
    assert config.schedule.steps == 100
    assert config.sampler.independent_from == 90
    assert config.training.null_prob == pytest.approx(0.1)


def test_toml_values_override_defaults(workdir, toml_file):
    config = load_run_config(toml_file)

    assert config.seed == 3
    assert config.schedule.steps == 40
    assert config.schedule.eta_single == pytest.approx(0.7)
    assert config.schedule.gamma_max == pytest.approx(0.9)


def test_environment_overrides_toml(workdir, toml_file, monkeypatch):
    monkeypatch.setenv("MTD_SCHEDULE__STEPS", "50")

    config = load_run_config(toml_file)

    assert config.schedule.steps == 50
    assert config.schedule.eta_single == pytest.approx(0.7)


def test_overrides_win_over_environment_and_toml(workdir, toml_file, monkeypatch):
    monkeypatch.setenv("MTD_SCHEDULE__STEPS", "50")

    config = load_run_config(toml_file, ["schedule.steps=60", "sampler.workers=2"], seed=9)

    assert config.schedule.steps == 60
    assert config.sampler.workers == 2
    assert config.sampler.independent_from == 30
    assert config.seed == 9


def test_unknown_keys_are_rejected(workdir):
    with pytest.raises(ConfigError, match="schedule.speed"):
        load_run_config(overrides=["schedule.speed=3"])


def test_unknown_toml_section_is_rejected(workdir, tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[sampling]\nworkers = 2\n", encoding="utf-8")

    with pytest.raises(ConfigError):
        load_run_config(path)


def test_malformed_toml_is_a_config_error(workdir, tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("[schedule\nsteps = 3\n", encoding="utf-8")

    with pytest.raises(ConfigError):
        load_run_config(path)


def test_missing_config_file_is_an_io_error(workdir, tmp_path):
    with pytest.raises(ArtifactIOError) as excinfo:
        load_run_config(tmp_path / "absent.toml")

    assert excinfo.value.error_code == "IO_ERROR"


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        (["schedule.steps=10"], "independent_from"),
        (["sampler.condition=3"], "conditions"),
        (["schedule.gamma_max=0.5", "schedule.alpha_min=0.6"], "alpha_min"),
        (["codebook.size=3", "codebook.clusters=4"], "clusters"),
        (["training.null_prob=1.0"], "null_prob"),
    ],
)
def test_cross_field_constraints_are_enforced(workdir, overrides, fragment):
    with pytest.raises(ConfigError, match=fragment):
        load_run_config(overrides=overrides)


def test_parse_override_nests_keys_and_parses_json():
    assert parse_override("schedule.steps=12") == {"schedule": {"steps": 12}}
    assert parse_override("schedule.dynamic=false") == {"schedule": {"dynamic": False}}
    assert parse_override("paths.model=out/model.txt") == {"paths": {"model": "out/model.txt"}}
    assert parse_override("seed=4") == {"seed": 4}


@pytest.mark.parametrize("item", ["schedule.steps", "=3", "schedule..steps=3"])
def test_parse_override_rejects_malformed_items(item):
    with pytest.raises(ConfigError):
        parse_override(item)


def test_config_digest_is_stable_and_sensitive(workdir):
    first = config_digest(load_run_config())
    again = config_digest(load_run_config())
    changed = config_digest(load_run_config(overrides=["metrics.fps=30"]))

    assert first == again
    assert first != changed
    assert len(first) == 64
