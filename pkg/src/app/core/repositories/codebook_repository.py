from abc import ABC, abstractmethod
from pathlib import Path

from app.core.domain.codebook import Codebook


class CodebookRepository(ABC):
    @abstractmethod
    def load(self, path: Path) -> Codebook:
        raise NotImplementedError

    @abstractmethod
    def save(self, codebook: Codebook, path: Path) -> None:
        raise NotImplementedError
