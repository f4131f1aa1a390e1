"""
去噪器契約 p_θ(z̃_0 | z_t, y)

DenoiserQuery 將一批位置的上下文攤平：目前狀態、左右鄰居（含 MASK 與
序列邊界哨兵）、條件、分段內位移、絕對位置與擴散步驟。
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from app.core.domain.tokens import NULL_CONDITION, TokenSequence
from app.core.exceptions.common import InvalidParameterError


def neighbor_states(
    states: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
    boundary_id: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Left/right neighbour state per position; ``boundary_id`` past a sequence edge."""
    left = np.roll(states, 1)
    right = np.roll(states, -1)
    left[starts] = boundary_id
    right[ends] = boundary_id
    return left, right


@dataclass(frozen=True, eq=False)
class DenoiserQuery:
    states: np.ndarray
    left: np.ndarray
    right: np.ndarray
    conditions: np.ndarray
    offsets: np.ndarray
    positions: np.ndarray
    steps: np.ndarray
    K: int

    @property
    def mask_id(self) -> int:
        return self.K

    @property
    def boundary_id(self) -> int:
        return self.K + 1

    def __len__(self) -> int:
        return int(self.states.size)

    @classmethod
    def from_sequence(cls, seq: TokenSequence, t: int, *, position_offset: int = 0) -> "DenoiserQuery":
        """
        Query for every position of ``seq`` at step ``t``.

        Only the two ends of ``seq`` see the boundary sentinel: inner segment
        boundaries keep their real neighbours (joint denoising).
        """
        n = len(seq)
        starts = np.zeros(n, dtype=bool)
        ends = np.zeros(n, dtype=bool)
        starts[0] = True
        ends[-1] = True
        left, right = neighbor_states(seq.states.copy(), starts, ends, seq.mask_id + 1)
        return cls(
            states=seq.states,
            left=left,
            right=right,
            conditions=seq.conditions,
            offsets=seq.offsets(),
            positions=np.arange(n, dtype=np.int64) + position_offset,
            steps=np.full(n, t, dtype=np.int64),
            K=seq.mask_id,
        )

    @classmethod
    def from_batch(
        cls,
        states: Sequence[np.ndarray],
        conditions: Sequence[int],
        steps: Sequence[int],
        K: int,
    ) -> "DenoiserQuery":
        """Flattened query over independent records (each record is its own sequence)."""
        if not states:
            raise InvalidParameterError("empty batch", field="batch")
        lengths = np.array([len(s) for s in states], dtype=np.int64)
        flat = np.concatenate([np.asarray(s, dtype=np.int64) for s in states])
        record_start = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        starts = np.zeros(flat.size, dtype=bool)
        ends = np.zeros(flat.size, dtype=bool)
        starts[record_start] = True
        ends[record_start + lengths - 1] = True
        left, right = neighbor_states(flat.copy(), starts, ends, K + 1)
        offsets = np.arange(flat.size) - np.repeat(record_start, lengths)
        return cls(
            states=flat,
            left=left,
            right=right,
            conditions=np.repeat(np.asarray(conditions, dtype=np.int64), lengths),
            offsets=offsets,
            positions=offsets.copy(),
            steps=np.repeat(np.asarray(steps, dtype=np.int64), lengths),
            K=K,
        )

    def unconditional(self) -> "DenoiserQuery":
        return replace(self, conditions=np.full_like(self.conditions, NULL_CONDITION))


class Denoiser(ABC):
    """predict 回傳每個位置在 K 個非 MASK token 上的機率（列和為 1）"""

    @property
    @abstractmethod
    def K(self) -> int:
        raise NotImplementedError

    @abstractmethod
    def predict(self, query: DenoiserQuery) -> np.ndarray:
        raise NotImplementedError
