from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.core.domain.tokens import TokenSequence
from app.core.exceptions.common import InvalidParameterError


@dataclass(frozen=True, eq=False)
class DatasetRecord:
    """訓練樣本：一個條件與其 token 序列（不含 MASK）"""

    condition: int
    tokens: np.ndarray

    def __post_init__(self) -> None:
        tokens = np.asarray(self.tokens, dtype=np.int64)
        if tokens.ndim != 1 or tokens.size < 1:
            raise InvalidParameterError("record tokens must be a non-empty vector", field="tokens")
        if self.condition < 1:
            raise InvalidParameterError("record condition must be an action id >= 1", field="condition")
        tokens = tokens.copy()
        tokens.setflags(write=False)
        object.__setattr__(self, "tokens", tokens)

    @property
    def length(self) -> int:
        return int(self.tokens.size)

    def to_sequence(self, mask_id: int) -> TokenSequence:
        return TokenSequence.single(self.tokens, self.condition, mask_id)
