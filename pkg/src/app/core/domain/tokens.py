"""Token 序列、分段與多段生成計畫"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.core.exceptions.common import InvalidParameterError

# The unconditional ("null") condition. Action conditions are 1..V.
NULL_CONDITION = 0


@dataclass(frozen=True)
class Segment:
    """一段動作：條件與 token 長度"""

    condition: int
    length: int

    def __post_init__(self) -> None:
        if self.condition < 1:
            raise InvalidParameterError(
                f"segment condition must be an action id >= 1, got {self.condition}",
                field="condition",
            )
        if self.length < 1:
            raise InvalidParameterError(f"segment length must be >= 1, got {self.length}", field="length")


@dataclass(frozen=True, eq=False)
class TokenSequence:
    """
    狀態序列（0..K-1 為 token，K 為 MASK）

    boundaries 為累積分段位移，首項 0、末項為序列長度。
    """

    states: np.ndarray
    conditions: np.ndarray
    boundaries: tuple[int, ...]
    mask_id: int

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=np.int64)
        conditions = np.asarray(self.conditions, dtype=np.int64)
        if states.ndim != 1 or states.size < 1:
            raise InvalidParameterError("states must be a non-empty vector", field="states")
        if conditions.shape != states.shape:
            raise InvalidParameterError("one condition per position is required", field="conditions")
        if np.any(states < 0) or np.any(states > self.mask_id):
            raise InvalidParameterError(f"states must lie in 0..{self.mask_id}", field="states")
        bounds = tuple(int(b) for b in self.boundaries)
        if len(bounds) < 2 or bounds[0] != 0 or bounds[-1] != states.size:
            raise InvalidParameterError("boundaries must start at 0 and end at the length", field="boundaries")
        if any(b >= c for b, c in zip(bounds, bounds[1:])):
            raise InvalidParameterError("boundaries must be strictly increasing", field="boundaries")
        for start, stop in zip(bounds, bounds[1:]):
            if np.any(conditions[start:stop] != conditions[start]):
                raise InvalidParameterError("condition must be constant within a segment", field="conditions")
        for name, value in (("states", states), ("conditions", conditions)):
            value = value.copy()
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "boundaries", bounds)

    @classmethod
    def masked(cls, segments: Sequence[Segment], mask_id: int) -> "TokenSequence":
        """All-MASK sequence laid out by ``segments`` (the absorbing prior)."""
        lengths = [s.length for s in segments]
        total = int(sum(lengths))
        return cls(
            states=np.full(total, mask_id, dtype=np.int64),
            conditions=np.repeat([s.condition for s in segments], lengths),
            boundaries=tuple(int(b) for b in np.concatenate([[0], np.cumsum(lengths)])),
            mask_id=mask_id,
        )

    @classmethod
    def single(cls, states: Sequence[int], condition: int, mask_id: int) -> "TokenSequence":
        states = np.asarray(states, dtype=np.int64)
        return cls(
            states=states,
            conditions=np.full(states.size, condition, dtype=np.int64),
            boundaries=(0, int(states.size)),
            mask_id=mask_id,
        )

    @classmethod
    def concat(cls, parts: Sequence["TokenSequence"]) -> "TokenSequence":
        if not parts:
            raise InvalidParameterError("nothing to concatenate")
        mask_ids = {p.mask_id for p in parts}
        if len(mask_ids) != 1:
            raise InvalidParameterError("cannot concatenate sequences over different vocabularies")
        bounds = [0]
        for part in parts:
            bounds.extend(bounds[-1] + b for b in part.boundaries[1:])
        return cls(
            states=np.concatenate([p.states for p in parts]),
            conditions=np.concatenate([p.conditions for p in parts]),
            boundaries=tuple(bounds),
            mask_id=parts[0].mask_id,
        )

    def __len__(self) -> int:
        return int(self.states.size)

    @property
    def segment_count(self) -> int:
        return len(self.boundaries) - 1

    @property
    def inner_boundaries(self) -> tuple[int, ...]:
        return self.boundaries[1:-1]

    def segments(self) -> list["TokenSequence"]:
        return [
            TokenSequence(
                states=self.states[start:stop],
                conditions=self.conditions[start:stop],
                boundaries=(0, stop - start),
                mask_id=self.mask_id,
            )
            for start, stop in zip(self.boundaries, self.boundaries[1:])
        ]

    def offsets(self) -> np.ndarray:
        """Segment-relative offset of every position."""
        out = np.empty(len(self), dtype=np.int64)
        for start, stop in zip(self.boundaries, self.boundaries[1:]):
            out[start:stop] = np.arange(stop - start)
        return out

    def mask_count(self) -> int:
        return int(np.count_nonzero(self.states == self.mask_id))

    def has_mask(self) -> bool:
        return self.mask_count() > 0

    def with_states(self, states: np.ndarray) -> "TokenSequence":
        return TokenSequence(
            states=states,
            conditions=self.conditions,
            boundaries=self.boundaries,
            mask_id=self.mask_id,
        )

    def same_as(self, other: "TokenSequence") -> bool:
        return (
            self.mask_id == other.mask_id
            and self.boundaries == other.boundaries
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.conditions, other.conditions)
        )


@dataclass(frozen=True)
class GenerationPlan:
    """多段生成計畫：分段、獨立階段起點 T_s、引導強度 s、種子"""

    segments: tuple[Segment, ...]
    independent_from: int
    guidance_scale: float
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise InvalidParameterError("plan needs at least one segment", field="segments")
        if self.independent_from < 0:
            raise InvalidParameterError("T_s must be >= 0", field="independent_from")
        if self.guidance_scale < 0:
            raise InvalidParameterError("guidance scale must be >= 0", field="guidance_scale")

    @property
    def N(self) -> int:
        return len(self.segments)

    def check_steps(self, T: int) -> None:
        if self.independent_from > T:
            raise InvalidParameterError(
                f"T_s={self.independent_from} exceeds T={T}", field="independent_from"
            )

    def digest(self) -> str:
        payload = {
            "segments": [[s.condition, s.length] for s in self.segments],
            "independent_from": self.independent_from,
            "guidance_scale": self.guidance_scale,
            "seed": self.seed,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def default(
        cls,
        *,
        conditions: int,
        count: int,
        length: int,
        independent_from: int,
        guidance_scale: float,
        seed: int,
    ) -> "GenerationPlan":
        """``count`` segments of ``length`` tokens cycling through conditions 1..V."""
        return cls(
            segments=tuple(Segment(condition=i % conditions + 1, length=length) for i in range(count)),
            independent_from=independent_from,
            guidance_scale=guidance_scale,
            seed=seed,
        )
