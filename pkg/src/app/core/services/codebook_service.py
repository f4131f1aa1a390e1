"""
碼本服務

合成碼本、距離排名矩陣、量化與 token → 軌跡解碼。
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from app.core.domain.codebook import FRAMES_PER_TOKEN, Codebook, DistanceKind, RankMatrix
from app.core.domain.tokens import TokenSequence
from app.core.domain.trajectory import MotionTrajectory
from app.core.exceptions.common import InvalidParameterError, InvalidStateError
from app.core.repositories.codebook_repository import CodebookRepository

logger = logging.getLogger(__name__)

CLUSTER_SPREAD = 3.0
MEMBER_SPREAD = 0.35
DEDUP_SCALE = 1e-6


def generate_synthetic_codebook(K: int, D: int, clusters: int, seed: int) -> Codebook:
    """K entries drawn around ``clusters`` Gaussian centres; deterministic per seed."""
    if K < 2 or D < 1:
        raise InvalidParameterError(f"codebook needs K >= 2 and D >= 1, got K={K} D={D}")
    if not 1 <= clusters <= K:
        raise InvalidParameterError(f"clusters must lie in 1..{K}, got {clusters}", field="clusters")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, CLUSTER_SPREAD, size=(clusters, D))
    members = np.arange(K) % clusters
    entries = centers[members] + rng.normal(0.0, MEMBER_SPREAD, size=(K, D))
    while True:
        _, first = np.unique(entries, axis=0, return_index=True)
        if first.size == K:
            break
        duplicates = np.setdiff1d(np.arange(K), first)
        entries[duplicates] += rng.normal(0.0, DEDUP_SCALE, size=(duplicates.size, D))
    return Codebook(entries=entries, seed=seed)


def _column_distances(entries: np.ndarray, j: int, distance: DistanceKind) -> np.ndarray:
    if distance is DistanceKind.L2:
        diff = entries - entries[j]
        d = np.einsum("kd,kd->k", diff, diff)
    else:
        norms = np.linalg.norm(entries, axis=1)
        denom = np.maximum(norms * norms[j], np.finfo(np.float64).tiny)
        d = 1.0 - (entries @ entries[j]) / denom
    # self is always the closest entry
    d[j] = -np.inf
    return d


def distance_rank_matrix(cb: Codebook, distance: DistanceKind | str = DistanceKind.L2) -> RankMatrix:
    """ranks[i, j] = 1-based rank of entry i by distance to entry j; ties by index."""
    distance = DistanceKind(distance)
    K = cb.K
    ranks = np.empty((K, K), dtype=np.int64)
    positions = np.arange(1, K + 1)
    for j in range(K):
        order = np.argsort(_column_distances(cb.entries, j, distance), kind="stable")
        ranks[order, j] = positions
    return RankMatrix(ranks=ranks, distance=distance)


def quantize(v: np.ndarray, cb: Codebook) -> int:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (cb.D,):
        raise InvalidParameterError(f"expected a {cb.D}-vector, got shape {v.shape}", field="v")
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("vector must be finite", field="v")
    diff = cb.entries - v
    return int(np.argmin(np.einsum("kd,kd->k", diff, diff)))


def quantize_many(vectors: np.ndarray, cb: Codebook) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[1] != cb.D:
        raise InvalidParameterError(f"expected an n x {cb.D} matrix, got {vectors.shape}", field="vectors")
    diff = vectors[:, None, :] - cb.entries[None, :, :]
    return np.argmin(np.einsum("nkd,nkd->nk", diff, diff), axis=1).astype(np.int64)


def joint_dim_for(D: int) -> int:
    return 3 if D % 3 == 0 else 1


def decode_tokens(tokens: TokenSequence | np.ndarray, cb: Codebook, fps: float) -> MotionTrajectory:
    """
    Linear-interpolation decoder: every token yields FRAMES_PER_TOKEN frames
    moving from its entry toward the next token's entry; the last token is held.
    """
    states = tokens.states if isinstance(tokens, TokenSequence) else np.asarray(tokens, dtype=np.int64)
    if states.size < 1:
        raise InvalidParameterError("nothing to decode", field="tokens")
    if isinstance(tokens, TokenSequence) and tokens.mask_id != cb.mask_id:
        raise InvalidParameterError(
            f"tokens were written for K={tokens.mask_id}, codebook has K={cb.K}", field="tokens"
        )
    if np.any(states == cb.mask_id):
        raise InvalidStateError("cannot decode a sequence that still contains MASK")
    if np.any(states < 0) or np.any(states > cb.mask_id):
        raise InvalidParameterError(f"tokens must lie in 0..{cb.K - 1}", field="tokens")
    start = cb.entries[states]
    stop = cb.entries[np.concatenate([states[1:], states[-1:]])]
    weights = np.arange(FRAMES_PER_TOKEN, dtype=np.float64) / FRAMES_PER_TOKEN
    frames = start[:, None, :] + (stop - start)[:, None, :] * weights[None, :, None]
    return MotionTrajectory(
        frames=frames.reshape(-1, cb.D),
        fps=fps,
        joint_dim=joint_dim_for(cb.D),
    )


class CodebookService:
    def __init__(self, codebook_repo: CodebookRepository):
        self.codebook_repo = codebook_repo

    def create(self, *, K: int, D: int, clusters: int, seed: int, path: Path) -> Codebook:
        codebook = generate_synthetic_codebook(K=K, D=D, clusters=clusters, seed=seed)
        self.codebook_repo.save(codebook, path)
        logger.info("codebook written K=%d D=%d clusters=%d path=%s", K, D, clusters, path)
        return codebook

    def load(self, path: Path) -> Codebook:
        return self.codebook_repo.load(path)
