from abc import ABC, abstractmethod
from pathlib import Path
from typing import Sequence

from app.core.domain.dataset import DatasetRecord


class DatasetRepository(ABC):
    @abstractmethod
    def load(self, path: Path) -> list[DatasetRecord]:
        raise NotImplementedError

    @abstractmethod
    def save(self, records: Sequence[DatasetRecord], path: Path) -> None:
        raise NotImplementedError
