"""
執行配置

來源優先順序：--set 覆寫 > 環境變數（MTD_ 前綴，__ 為巢狀分隔）> TOML 檔 > 預設值。
未知鍵一律拒絕；跨欄位約束於載入時重新驗證。
"""
from __future__ import annotations

import hashlib
import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from app.core.domain.codebook import DistanceKind
from app.core.exceptions.common import ArtifactIOError
from app.core.exceptions.config import ConfigError


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CodebookSettings(_Section):
    size: int = Field(32, ge=2, description="K：非 MASK token 數")
    dim: int = Field(6, ge=1, description="D：每個 entry 的維度")
    clusters: int = Field(4, ge=1)
    distance: DistanceKind = DistanceKind.L2

    @model_validator(mode="after")
    def _clusters_fit(self) -> "CodebookSettings":
        if self.clusters > self.size:
            raise ValueError(f"clusters={self.clusters} exceeds codebook size {self.size}")
        return self


class ScheduleSettings(_Section):
    steps: int = Field(100, ge=1, description="T")
    gamma_max: float = Field(0.9, gt=0, lt=1)
    alpha_min: float = Field(1e-4, gt=0, lt=1)
    eta_single: float = Field(0.5, ge=0)
    eta_multi: float = Field(0.25, ge=0)
    dynamic: bool = True

    @model_validator(mode="after")
    def _feasible(self) -> "ScheduleSettings":
        if self.alpha_min >= 1 - self.gamma_max:
            raise ValueError("alpha_min must be below 1 - gamma_max")
        return self


class SamplerSettings(_Section):
    guidance_single: float = Field(4.0, ge=0)
    guidance_multi: float = Field(2.0, ge=0)
    independent_from: int = Field(90, ge=0, description="T_s")
    condition: int = Field(1, ge=1, description="generate 使用的條件")
    length: int = Field(16, ge=1, description="generate 的 token 長度")
    segments: int = Field(4, ge=1, description="預設多段計畫的段數 N")
    segment_length: int = Field(12, ge=1)
    count: int = Field(1, ge=1)
    workers: int = Field(1, ge=1)


class TrainingSettings(_Section):
    loss_coefficient: float = Field(5e-4, ge=0, description="λ")
    learning_rate: float = Field(0.1, gt=0)
    epochs: int = Field(200, ge=0)
    null_prob: float = Field(0.1, ge=0, lt=1)
    buckets: int = Field(10, ge=1)
    batch_size: Optional[int] = Field(None, ge=1)
    init_scale: float = Field(0.0, ge=0)
    progress: bool = True


class MetricsSettings(_Section):
    fps: float = Field(20.0, gt=0)
    half_width: int = Field(40, ge=2)
    epsilon: float = Field(1e-12, gt=0)
    pair_count: int = Field(100, ge=1)


class DatasetSettings(_Section):
    conditions: int = Field(2, ge=1, description="V")
    sequences_per_condition: int = Field(50, ge=1)
    sequence_length: int = Field(16, ge=1)


class PathSettings(_Section):
    codebook: Path = Path("runs/codebook.txt")
    dataset: Path = Path("runs/dataset.jsonl")
    model: Path = Path("runs/model.txt")
    tokens: Path = Path("runs/tokens.jsonl")
    reference: Optional[Path] = None


class RunConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="MTD_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    seed: int = Field(0, ge=0)
    codebook: CodebookSettings = Field(default_factory=CodebookSettings)
    schedule: ScheduleSettings = Field(default_factory=ScheduleSettings)
    sampler: SamplerSettings = Field(default_factory=SamplerSettings)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    metrics: MetricsSettings = Field(default_factory=MetricsSettings)
    dataset: DatasetSettings = Field(default_factory=DatasetSettings)
    paths: PathSettings = Field(default_factory=PathSettings)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings, env_settings, TomlConfigSettingsSource(settings_cls))

    @model_validator(mode="after")
    def _cross_section(self) -> "RunConfig":
        if self.sampler.independent_from > self.schedule.steps:
            raise ValueError(
                f"sampler.independent_from={self.sampler.independent_from} exceeds schedule.steps={self.schedule.steps}"
            )
        if self.sampler.condition > self.dataset.conditions:
            raise ValueError(
                f"sampler.condition={self.sampler.condition} exceeds dataset.conditions={self.dataset.conditions}"
            )
        return self


def parse_override(item: str) -> dict[str, Any]:
    """
    ``a.b=value`` → ``{"a": {"b": value}}``；value 先以 JSON 解析，失敗則視為字串

    :raises ConfigError: 缺少 ``=`` 或鍵為空
    """
    key, sep, raw = item.partition("=")
    parts = key.strip().split(".")
    if not sep or not all(parts):
        raise ConfigError(f"override '{item}' is not of the form key.sub=value")
    try:
        value: Any = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    nested: dict[str, Any] = {parts[-1]: value}
    for part in reversed(parts[:-1]):
        nested = {part: nested}
    return nested


def _merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _describe(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(p) for p in first["loc"]) or "config"
    more = f" (+{exc.error_count() - 1} more)" if exc.error_count() > 1 else ""
    return f"{where}: {first['msg']}{more}"


def load_run_config(
    path: Path | None = None,
    overrides: Sequence[str] = (),
    *,
    seed: int | None = None,
) -> RunConfig:
    """
    載入並驗證配置

    :param path: TOML 配置檔（可選）
    :param overrides: ``--set`` 覆寫
    :param seed: ``--seed``，等同 ``--set seed=<n>``
    :raises ArtifactIOError: 配置檔不存在
    :raises ConfigError: 解析或驗證失敗
    """
    settings_cls: type[RunConfig] = RunConfig
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ArtifactIOError(path, "config file not found")
        settings_cls = type(
            "RunConfig",
            (RunConfig,),
            {"model_config": SettingsConfigDict(**{**RunConfig.model_config, "toml_file": path})},
        )
    init: dict[str, Any] = {}
    for item in overrides:
        init = _merge(init, parse_override(item))
    if seed is not None:
        init["seed"] = seed
    try:
        return settings_cls(**init)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_digest(config: RunConfig) -> str:
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
