from pathlib import Path
from typing import Sequence

from app.core.services.metrics_service import EvaluationRecord
from app.infra.storage.converters import evaluation_record_to_schema
from app.infra.storage.repositories.base_repository import JsonLinesRepositoryBase
from app.infra.storage.schemas import EvaluationRecordSchema


class EvaluationFileRepository:
    """Write-only: evaluation reports are consumed by external tooling."""

    def __init__(self) -> None:
        self._base = JsonLinesRepositoryBase(EvaluationRecordSchema)

    def save(self, records: Sequence[EvaluationRecord], path: Path) -> None:
        self._base.write_rows((evaluation_record_to_schema(r) for r in records), path)
