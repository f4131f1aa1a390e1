from abc import ABC, abstractmethod
from pathlib import Path
from typing import Sequence

from app.core.domain.generation import GeneratedSequence


class TokenRepository(ABC):
    @abstractmethod
    def load(self, path: Path) -> list[GeneratedSequence]:
        raise NotImplementedError

    @abstractmethod
    def save(self, records: Sequence[GeneratedSequence], path: Path) -> None:
        raise NotImplementedError
