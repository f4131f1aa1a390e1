from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.core.exceptions.common import InvalidParameterError


@dataclass(frozen=True, eq=False)
class MotionTrajectory:
    """
    解碼後的連續動作：L 幀 x (J x joint_dim) 座標

    joint_dim 預設 3（每個關節 xyz）；無法整除時由呼叫端傳入 1。
    """

    frames: np.ndarray
    fps: float
    joint_dim: int = 3

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim == 1:
            frames = frames[:, None]
        if frames.ndim != 2 or frames.shape[0] < 2:
            raise InvalidParameterError("trajectory needs at least 2 frames", field="frames")
        if not np.all(np.isfinite(frames)):
            raise InvalidParameterError("trajectory values must be finite", field="frames")
        if self.fps <= 0:
            raise InvalidParameterError(f"fps must be positive, got {self.fps}", field="fps")
        if self.joint_dim < 1 or frames.shape[1] % self.joint_dim:
            raise InvalidParameterError(
                f"{frames.shape[1]} components do not split into joints of {self.joint_dim}",
                field="joint_dim",
            )
        frames = frames.copy()
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def length(self) -> int:
        return int(self.frames.shape[0])

    @property
    def joint_count(self) -> int:
        return int(self.frames.shape[1] // self.joint_dim)

    def joints(self) -> np.ndarray:
        """Frames reshaped to (L, J, joint_dim)."""
        return self.frames.reshape(self.length, self.joint_count, self.joint_dim)

    def scaled(self, factor: float) -> "MotionTrajectory":
        return MotionTrajectory(frames=self.frames * factor, fps=self.fps, joint_dim=self.joint_dim)
