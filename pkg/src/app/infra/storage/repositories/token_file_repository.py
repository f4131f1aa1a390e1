from pathlib import Path
from typing import Sequence

from app.core.domain.generation import GeneratedSequence
from app.core.repositories.token_repository import TokenRepository
from app.infra.storage.converters import token_record_from_schema, token_record_to_schema
from app.infra.storage.repositories.base_repository import JsonLinesRepositoryBase
from app.infra.storage.schemas import TokenRecordSchema


class TokenFileRepository(TokenRepository):
    def __init__(self) -> None:
        self._base = JsonLinesRepositoryBase(TokenRecordSchema)

    def load(self, path: Path) -> list[GeneratedSequence]:
        rows = self._base.read_rows(path)
        return self._base.convert_rows(rows, path, token_record_from_schema)

    def save(self, records: Sequence[GeneratedSequence], path: Path) -> None:
        self._base.write_rows((token_record_to_schema(r) for r in records), path)
