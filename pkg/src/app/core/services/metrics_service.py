"""
評估指標

- jerk：每個關節 ln(∫‖da/dt‖² dt / v_peak²) 的總和（窗口內）
- transition_windows：分段邊界前後的幀窗口
- diversity：隨機不重疊配對的平均歐氏距離
- frechet_lite：以原始特徵近似的 Fréchet 距離
- profile_export：逐幀平均速度與平均 jerk 表
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from app.core.domain.codebook import FRAMES_PER_TOKEN, Codebook
from app.core.domain.generation import GeneratedSequence
from app.core.domain.reports import MIN_JERK_WINDOW, FrameWindow, JerkReport, MetricSummary, ProfileRow
from app.core.domain.trajectory import MotionTrajectory
from app.core.exceptions.common import InvalidParameterError
from app.core.repositories.dataset_repository import DatasetRepository
from app.core.repositories.token_repository import TokenRepository
from app.core.services.codebook_service import decode_tokens
from app.core.types.rng import substream

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-12
DEFAULT_HALF_WIDTH = 40
RIDGE = 1e-6
RANK_TOLERANCE = 1e-12


def derivatives(traj: MotionTrajectory) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Velocity, acceleration and jerk per frame, shaped (L, J, joint_dim)."""
    if traj.length < 3:
        raise InvalidParameterError("derivatives need at least 3 frames", field="frames")
    dt = 1.0 / traj.fps
    x = traj.joints()
    v = np.gradient(x, dt, axis=0, edge_order=2)
    a = np.gradient(v, dt, axis=0, edge_order=2)
    j = np.gradient(a, dt, axis=0, edge_order=2)
    return v, a, j


def jerk(
    traj: MotionTrajectory,
    window: FrameWindow | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> JerkReport:
    """
    Per-joint log jerk over ``window`` (whole clip when None).

    Derivatives are taken on the whole clip and then sliced, so a window's
    edge frames still see their real neighbours. Both the integral and the
    squared peak speed are floored at ``epsilon`` before the log.
    """
    if epsilon <= 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}", field="epsilon")
    window = window or FrameWindow(0, traj.length)
    if window.start < 0 or window.stop > traj.length or window.length < MIN_JERK_WINDOW:
        raise InvalidParameterError(
            f"window {window.as_tuple()} must lie in 0..{traj.length} and span >= {MIN_JERK_WINDOW} frames",
            field="window",
        )
    v, _, j = derivatives(traj)
    sl = slice(window.start, window.stop)
    speed = np.linalg.norm(v[sl], axis=2)
    jerk_sq = np.sum(j[sl] ** 2, axis=2)
    integral = trapezoid(jerk_sq, dx=1.0 / traj.fps, axis=0)
    peak_sq = np.max(speed, axis=0) ** 2
    floored = int(np.count_nonzero(integral < epsilon))
    per_joint = np.log(np.maximum(integral, epsilon) / np.maximum(peak_sq, epsilon))
    if floored:
        logger.debug("jerk integral floored joints=%d window=%s", floored, window.as_tuple())
    return JerkReport(
        per_joint=per_joint,
        total=float(np.sum(per_joint)),
        window=window,
        fps=traj.fps,
        epsilon=epsilon,
        floored=floored,
    )


def transition_windows(boundaries: Iterable[int], half_width: int, length: int) -> list[FrameWindow]:
    """[b - half_width/2, b + half_width/2) per boundary, clipped to [0, length)."""
    if half_width < 2:
        raise InvalidParameterError(f"half_width must be >= 2, got {half_width}", field="half_width")
    windows = []
    for b in boundaries:
        if not 0 < b < length:
            raise InvalidParameterError(f"boundary {b} is not inside 0..{length}", field="boundaries")
        windows.append(FrameWindow(max(0, b - half_width // 2), min(length, b + half_width // 2)))
    return windows


def frame_boundaries(token_boundaries: Iterable[int]) -> list[int]:
    return [b * FRAMES_PER_TOKEN for b in token_boundaries]


def mean_pooled_features(trajectories: Sequence[MotionTrajectory]) -> np.ndarray:
    return np.stack([t.frames.mean(axis=0) for t in trajectories])


def diversity(features: np.ndarray, pair_count: int, rng: np.random.Generator) -> float:
    """Mean distance over up to ``pair_count`` disjoint random pairs."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise InvalidParameterError("diversity needs at least 2 feature vectors", field="features")
    if pair_count < 1:
        raise InvalidParameterError("pair_count must be >= 1", field="pair_count")
    pairs = min(pair_count, features.shape[0] // 2)
    order = rng.permutation(features.shape[0])[: 2 * pairs]
    first, second = features[order[0::2]], features[order[1::2]]
    return float(np.mean(np.linalg.norm(first - second, axis=1)))


def _sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(matrix)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T


def _regularised(cov: np.ndarray, name: str) -> np.ndarray:
    values = np.linalg.eigvalsh(cov)
    if values.min() <= RANK_TOLERANCE * max(values.max(), 1.0):
        logger.warning("covariance of %s is rank deficient; adding %g to the diagonal", name, RIDGE)
        return cov + RIDGE * np.eye(cov.shape[0])
    return cov


def frechet_lite(set_a: np.ndarray, set_b: np.ndarray) -> float:
    """
    ‖μ_A - μ_B‖² + Tr(Σ_A + Σ_B - 2(Σ_A Σ_B)^{1/2}).

    Tr((Σ_A Σ_B)^{1/2}) is computed as Tr((√Σ_A Σ_B √Σ_A)^{1/2}), which is
    symmetric in A and B.
    """
    set_a = np.atleast_2d(np.asarray(set_a, dtype=np.float64))
    set_b = np.atleast_2d(np.asarray(set_b, dtype=np.float64))
    if set_a.ndim != 2 or set_b.ndim != 2 or set_a.shape[1] != set_b.shape[1]:
        raise InvalidParameterError("feature sets must share their dimension", field="features")
    dim = set_a.shape[1]
    for name, s in (("A", set_a), ("B", set_b)):
        if s.shape[0] <= dim:
            raise InvalidParameterError(
                f"set {name} needs more than {dim} samples, got {s.shape[0]}", field="features"
            )
    mu_a, mu_b = set_a.mean(axis=0), set_b.mean(axis=0)
    cov_a = _regularised(np.atleast_2d(np.cov(set_a, rowvar=False)), "A")
    cov_b = _regularised(np.atleast_2d(np.cov(set_b, rowvar=False)), "B")
    root_a = _sqrt_psd(cov_a)
    cross = _sqrt_psd(root_a @ cov_b @ root_a)
    value = float(np.sum((mu_a - mu_b) ** 2) + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross))
    return max(value, 0.0)


def profile_export(traj: MotionTrajectory, boundaries: Iterable[int] = ()) -> list[ProfileRow]:
    """One row per frame: mean joint speed and mean joint jerk magnitude."""
    v, _, j = derivatives(traj)
    speed = np.linalg.norm(v, axis=2).mean(axis=1)
    jerk_mag = np.linalg.norm(j, axis=2).mean(axis=1)
    marks = set(boundaries)
    return [
        ProfileRow(
            frame=f,
            time=f / traj.fps,
            mean_speed=float(speed[f]),
            mean_jerk=float(jerk_mag[f]),
            boundary=f in marks,
        )
        for f in range(traj.length)
    ]


def render_profile(rows: Sequence[ProfileRow]) -> str:
    lines = [f"{'frame':>7} {'time':>10} {'mean_speed':>16} {'mean_jerk':>16} {'boundary':>8}"]
    for r in rows:
        lines.append(
            f"{r.frame:>7d} {r.time:>10.4f} {r.mean_speed:>16.8e} {r.mean_jerk:>16.8e} {int(r.boundary):>8d}"
        )
    return "\n".join(lines) + "\n"


def summarise(metric: str, values: Sequence[float]) -> MetricSummary:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return MetricSummary(metric=metric, count=0, mean=float("nan"), std=float("nan"))
    return MetricSummary(metric=metric, count=int(arr.size), mean=float(arr.mean()), std=float(arr.std()))


@dataclass(frozen=True)
class EvaluationRecord:
    metric: str
    value: float
    sequence: int | None = None
    window: tuple[int, int] | None = None
    parameters: dict | None = None


class EvaluationService:
    def __init__(self, token_repo: TokenRepository, dataset_repo: DatasetRepository):
        self.token_repo = token_repo
        self.dataset_repo = dataset_repo

    def evaluate(
        self,
        *,
        tokens_path: Path,
        codebook: Codebook,
        fps: float,
        half_width: int = DEFAULT_HALF_WIDTH,
        epsilon: float = DEFAULT_EPSILON,
        seed: int = 0,
        pair_count: int = 100,
        reference_path: Path | None = None,
    ) -> tuple[list[EvaluationRecord], list[MetricSummary]]:
        generated = self.token_repo.load(tokens_path)
        if not generated:
            raise InvalidParameterError(f"{tokens_path} holds no sequences", field="tokens")
        records = self.score(generated, codebook, fps=fps, half_width=half_width, epsilon=epsilon)
        features = mean_pooled_features([decode_tokens(g.sequence, codebook, fps) for g in generated])
        if features.shape[0] >= 2:
            records.append(
                EvaluationRecord(
                    metric="diversity",
                    value=diversity(features, pair_count, substream(seed, 0)),
                    parameters={"pair_count": pair_count},
                )
            )
        if reference_path is not None:
            reference = self.dataset_repo.load(reference_path)
            ref_features = mean_pooled_features([decode_tokens(r.tokens, codebook, fps) for r in reference])
            if min(features.shape[0], ref_features.shape[0]) > codebook.D:
                records.append(EvaluationRecord(metric="frechet_lite", value=frechet_lite(features, ref_features)))
            else:
                logger.warning(
                    "skipping frechet_lite generated=%d reference=%d dim=%d",
                    features.shape[0], ref_features.shape[0], codebook.D,
                )
        names = sorted({r.metric for r in records})
        summaries = [summarise(n, [r.value for r in records if r.metric == n]) for n in names]
        return records, summaries

    def score(
        self,
        generated: Sequence[GeneratedSequence],
        codebook: Codebook,
        *,
        fps: float,
        half_width: int,
        epsilon: float,
    ) -> list[EvaluationRecord]:
        """Whole-clip jerk plus one transition-window jerk per inner boundary."""
        params = {"fps": fps, "epsilon": epsilon}
        out = []
        for index, g in enumerate(generated):
            traj = decode_tokens(g.sequence, codebook, fps)
            out.append(EvaluationRecord(metric="jerk_clip", value=jerk(traj, epsilon=epsilon).total,
                                        sequence=index, parameters=params))
            bounds = frame_boundaries(g.sequence.inner_boundaries)
            for window in transition_windows(bounds, half_width, traj.length):
                if window.length < MIN_JERK_WINDOW:
                    logger.warning("transition window %s too short; skipped", window.as_tuple())
                    continue
                report = jerk(traj, window, epsilon)
                out.append(
                    EvaluationRecord(
                        metric="jerk_transition",
                        value=report.total,
                        sequence=index,
                        window=window.as_tuple(),
                        parameters={**params, "half_width": half_width, "floored": report.floored},
                    )
                )
        return out

    def profile(self, *, tokens_path: Path, codebook: Codebook, fps: float, index: int = 0) -> str:
        generated = self.token_repo.load(tokens_path)
        if not 0 <= index < len(generated):
            raise InvalidParameterError(f"record index {index} outside 0..{len(generated) - 1}", field="index")
        seq = generated[index].sequence
        traj = decode_tokens(seq, codebook, fps)
        return render_profile(profile_export(traj, frame_boundaries(seq.inner_boundaries)))
