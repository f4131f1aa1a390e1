"""
執行紀錄（manifest）

每個子命令的輸出旁寫一份 ``<out>.manifest.json``。
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

from app.infra.storage.atomic import atomic_write_text
from app.infra.storage.schemas import ManifestSchema

DISTRIBUTION = "motion-token-diffusion"


def package_version() -> str:
    try:
        return version(DISTRIBUTION)
    except PackageNotFoundError:
        return "0.0.0+local"


def manifest_path(out: Path) -> Path:
    return Path(out).with_name(Path(out).name + ".manifest.json")


class ManifestWriter:
    def write(
        self,
        out: Path,
        *,
        command: str,
        config_digest: str,
        seed: int,
        wall_clock_seconds: float,
        inputs: dict[str, Path] | None = None,
        outputs: dict[str, Path] | None = None,
        details: dict[str, Any] | None = None,
    ) -> Path:
        manifest = ManifestSchema(
            command=command,
            version=package_version(),
            config_digest=config_digest,
            seed=seed,
            wall_clock_seconds=wall_clock_seconds,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            inputs={k: str(v) for k, v in (inputs or {}).items()},
            outputs={k: str(v) for k, v in (outputs or {}).items()},
            details=details or {},
        )
        path = manifest_path(out)
        atomic_write_text(path, json.dumps(manifest.model_dump(), indent=2, sort_keys=True) + "\n")
        return path
