"""碼本（值對象）與距離排名矩陣"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.core.exceptions.common import InvalidParameterError

# Each token stands for this many decoded frames.
FRAMES_PER_TOKEN = 4


class DistanceKind(str, Enum):
    L2 = "l2"
    COSINE = "cosine"


def _frozen(array: np.ndarray, dtype: type) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Codebook:
    """碼本：K 個 D 維向量，MASK 的狀態編號為 K"""

    entries: np.ndarray
    seed: int = 0

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise InvalidParameterError("codebook entries must be a K x D matrix", field="entries")
        k, d = entries.shape
        if k < 2 or d < 1:
            raise InvalidParameterError(f"codebook needs K >= 2 and D >= 1, got K={k} D={d}")
        if not np.all(np.isfinite(entries)):
            raise InvalidParameterError("codebook entries must be finite", field="entries")
        if np.unique(entries, axis=0).shape[0] != k:
            raise InvalidParameterError("codebook entries must be pairwise distinct", field="entries")
        object.__setattr__(self, "entries", _frozen(entries, np.float64))

    @property
    def K(self) -> int:
        return int(self.entries.shape[0])

    @property
    def D(self) -> int:
        return int(self.entries.shape[1])

    @property
    def mask_id(self) -> int:
        return self.K

    def translated(self, offset: np.ndarray) -> "Codebook":
        return Codebook(entries=self.entries + np.asarray(offset, dtype=np.float64), seed=self.seed)


@dataclass(frozen=True, eq=False)
class RankMatrix:
    """
    ranks[i, j]：以與 entry j 的距離排序時 entry i 的名次（1 = entry j 自身）
    """

    ranks: np.ndarray
    distance: DistanceKind = DistanceKind.L2

    def __post_init__(self) -> None:
        ranks = np.asarray(self.ranks)
        if ranks.ndim != 2 or ranks.shape[0] != ranks.shape[1]:
            raise InvalidParameterError("rank matrix must be square", field="ranks")
        k = ranks.shape[0]
        expected = np.arange(1, k + 1)
        if not np.array_equal(np.sort(ranks, axis=0), np.broadcast_to(expected[:, None], ranks.shape)):
            raise InvalidParameterError("every rank column must be a permutation of 1..K", field="ranks")
        if not np.all(np.diag(ranks) == 1):
            raise InvalidParameterError("self rank must be 1", field="ranks")
        object.__setattr__(self, "ranks", _frozen(ranks, np.int64))

    @property
    def K(self) -> int:
        return int(self.ranks.shape[0])
