from pathlib import Path
from typing import Sequence

from app.core.domain.dataset import DatasetRecord
from app.core.repositories.dataset_repository import DatasetRepository
from app.infra.storage.converters import dataset_record_from_schema, dataset_record_to_schema
from app.infra.storage.repositories.base_repository import JsonLinesRepositoryBase
from app.infra.storage.schemas import DatasetRecordSchema


class DatasetFileRepository(DatasetRepository):
    def __init__(self) -> None:
        self._base = JsonLinesRepositoryBase(DatasetRecordSchema)

    def load(self, path: Path) -> list[DatasetRecord]:
        rows = self._base.read_rows(path)
        return self._base.convert_rows(rows, path, dataset_record_from_schema)

    def save(self, records: Sequence[DatasetRecord], path: Path) -> None:
        self._base.write_rows((dataset_record_to_schema(r) for r in records), path)
