from abc import ABC, abstractmethod
from pathlib import Path

from app.core.domain.denoiser import TabularDenoiser


class DenoiserRepository(ABC):
    @abstractmethod
    def load(self, path: Path) -> TabularDenoiser:
        raise NotImplementedError

    @abstractmethod
    def save(self, model: TabularDenoiser, path: Path) -> None:
        raise NotImplementedError
