from pathlib import Path
from typing import Callable, Generic, Iterable, List, Sequence, Type, TypeVar

from pydantic import BaseModel, ValidationError

from app.core.exceptions.base import DomainError
from app.core.exceptions.common import ArtifactFormatError
from app.infra.storage.atomic import atomic_write_text, read_text

S = TypeVar("S", bound=BaseModel)

FORMAT_VERSION = "v1"


def format_values(values: Iterable[float]) -> str:
    """Space-separated values with 17 significant digits (round-trips float64)."""
    return " ".join(f"{float(v):.17g}" for v in values)


class JsonLinesRepositoryBase(Generic[S]):
    """
    JSON lines 檔案的通用讀寫基類

    每行一筆 pydantic 紀錄；讀取時任何格式或領域驗證失敗都轉為
    ArtifactFormatError 並標示行號。
    """

    def __init__(self, schema: Type[S]):
        self.__schema__ = schema

    def write_rows(self, rows: Iterable[S], path: Path) -> None:
        """
        以原子方式寫入所有紀錄

        :param rows: Schema 實例
        :param path: 目標檔案
        """
        text = "".join(row.model_dump_json() + "\n" for row in rows)
        atomic_write_text(path, text)

    def read_rows(self, path: Path) -> List[S]:
        """
        讀取所有紀錄（空行略過）

        :param path: 來源檔案
        :raises ArtifactFormatError: 任一行無法解析
        """
        rows = []
        for number, line in enumerate(read_text(path).splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rows.append(self.__schema__.model_validate_json(line))
            except ValidationError as exc:
                raise ArtifactFormatError(path, f"line {number}: {exc.errors()[0]['msg']}") from exc
        return rows

    def convert_rows(self, rows: List[S], path: Path, converter: Callable[[S], object]) -> list:
        out = []
        for number, row in enumerate(rows, start=1):
            try:
                out.append(converter(row))
            except (DomainError, ValueError) as exc:
                raise ArtifactFormatError(path, f"record {number}: {exc}") from exc
        return out


def parse_header(line: str, magic: str, keys: Sequence[str], path: Path) -> dict[str, int]:
    """
    解析 ``<magic> v1 key=value ...`` 標頭

    :raises ArtifactFormatError: 魔術字、版本或欄位不符
    """
    parts = line.split()
    name = " ".join(parts[:2])
    if name != f"{magic} {FORMAT_VERSION}":
        raise ArtifactFormatError(path, f"expected header '{magic} {FORMAT_VERSION}', got '{name}'")
    fields = {}
    for part in parts[2:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise ArtifactFormatError(path, f"malformed header field '{part}'")
        try:
            fields[key] = int(value)
        except ValueError as exc:
            raise ArtifactFormatError(path, f"header field {key} is not an integer") from exc
    missing = [k for k in keys if k not in fields]
    if missing:
        raise ArtifactFormatError(path, f"header lacks {', '.join(missing)}")
    return fields


def parse_values(line: str, count: int, path: Path, where: str) -> list[float]:
    try:
        values = [float(v) for v in line.split()]
    except ValueError as exc:
        raise ArtifactFormatError(path, f"{where}: non-numeric value") from exc
    if len(values) != count:
        raise ArtifactFormatError(path, f"{where}: expected {count} values, got {len(values)}")
    return values
