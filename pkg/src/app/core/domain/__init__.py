"""
Domain 層模組

導出所有值對象與聚合，方便其他層使用。
"""

from app.core.domain.codebook import FRAMES_PER_TOKEN, Codebook, DistanceKind, RankMatrix
from app.core.domain.dataset import DatasetRecord
from app.core.domain.reports import FrameWindow, JerkReport
from app.core.domain.schedule import NoiseSchedule, TransitionMatrix
from app.core.domain.tokens import NULL_CONDITION, GenerationPlan, Segment, TokenSequence
from app.core.domain.trajectory import MotionTrajectory

__all__ = [
    "Codebook",
    "DatasetRecord",
    "DistanceKind",
    "FRAMES_PER_TOKEN",
    "FrameWindow",
    "GenerationPlan",
    "JerkReport",
    "MotionTrajectory",
    "NULL_CONDITION",
    "NoiseSchedule",
    "RankMatrix",
    "Segment",
    "TokenSequence",
    "TransitionMatrix",
]
