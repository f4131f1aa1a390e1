"""評估報告（值對象）"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.core.exceptions.common import InvalidParameterError

MIN_JERK_WINDOW = 5


@dataclass(frozen=True)
class FrameWindow:
    """Half-open frame interval [start, stop)."""

    start: int
    stop: int

    @property
    def length(self) -> int:
        return self.stop - self.start

    def as_tuple(self) -> tuple[int, int]:
        return (self.start, self.stop)


@dataclass(frozen=True, eq=False)
class JerkReport:
    per_joint: np.ndarray
    total: float
    window: FrameWindow
    fps: float
    epsilon: float
    floored: int = 0  # joints whose jerk integral hit the epsilon floor

    def __post_init__(self) -> None:
        if self.window.length < MIN_JERK_WINDOW:
            raise InvalidParameterError(
                f"jerk window needs >= {MIN_JERK_WINDOW} frames, got {self.window.length}",
                field="window",
            )
        if abs(self.total - float(np.sum(self.per_joint))) > 1e-12 * max(1.0, abs(self.total)):
            raise InvalidParameterError("jerk total must equal the per-joint sum")


@dataclass(frozen=True)
class ProfileRow:
    frame: int
    time: float
    mean_speed: float
    mean_jerk: float
    boundary: bool


@dataclass(frozen=True)
class AuditRow:
    t: int
    step_deviation: float
    cumulative_deviation: float
    mask_mass: float
    beta_min: float
    beta_max: float


@dataclass(frozen=True)
class MetricSummary:
    metric: str
    count: int
    mean: float
    std: float
