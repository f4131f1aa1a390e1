from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.core.domain.tokens import TokenSequence


@dataclass(frozen=True, eq=False)
class GeneratedSequence:
    """一筆生成（或加噪）結果及其來源資訊"""

    sequence: TokenSequence
    seed: int
    plan_digest: str
    step: int | None = None
    source: np.ndarray | None = None

    @property
    def segment_conditions(self) -> list[int]:
        return [int(self.sequence.conditions[start]) for start in self.sequence.boundaries[:-1]]

    @property
    def segment_lengths(self) -> list[int]:
        b = self.sequence.boundaries
        return [stop - start for start, stop in zip(b, b[1:])]
