"""
取樣服務

- guided_log_probs：classifier-free guidance，(s+1)·log p_cond - s·log p_uncond 後重新正規化
- reverse_step：後驗對 z̃_0 預測取混合後逐位置獨立取樣
- generate_single：自全 MASK 先驗反向去噪 T 步
- generate_multi：兩階段取樣（T..T_s+1 聯合、T_s..1 各段獨立）

隨機數約定：聯合階段使用 substream(seed, 0)，第 0 段於獨立階段沿用同一串流，
第 i > 0 段使用 substream(seed, i)。因此 T_s = T 與逐段獨立生成逐位元相同。
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from app.core.domain.generation import GeneratedSequence
from app.core.domain.tokens import GenerationPlan, Segment, TokenSequence
from app.core.exceptions.common import InvalidParameterError
from app.core.exceptions.sampler import SamplingError
from app.core.ports.denoiser import Denoiser, DenoiserQuery
from app.core.repositories.token_repository import TokenRepository
from app.core.services.schedule_service import REACHABLE_FLOOR, TransitionModel
from app.core.types.rng import derive_seed, sample_categorical, substream

logger = logging.getLogger(__name__)

LOG_FLOOR = float(np.log(REACHABLE_FLOOR))


def guided_log_probs(cond: np.ndarray, uncond: np.ndarray, s: float) -> np.ndarray:
    """
    cond + s·(cond - uncond), renormalised per row.

    Entries impossible under ``cond`` stay impossible; an impossible ``uncond``
    entry is floored so it cannot produce +inf.
    """
    cond = np.asarray(cond, dtype=np.float64)
    uncond = np.asarray(uncond, dtype=np.float64)
    if cond.shape != uncond.shape:
        raise InvalidParameterError(
            f"conditional {cond.shape} and unconditional {uncond.shape} shapes differ", field="uncond"
        )
    if s < 0:
        raise InvalidParameterError(f"guidance scale must be >= 0, got {s}", field="s")
    if s == 0:
        return cond.copy()
    possible = np.isfinite(cond)
    combined = np.full_like(cond, -np.inf)
    floored = np.maximum(uncond, LOG_FLOOR)
    combined[possible] = cond[possible] + s * (cond[possible] - floored[possible])
    return combined - logsumexp(combined, axis=-1, keepdims=True)


def _log(probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(probs)


class Sampler:
    """
    反向取樣器：綁定一個轉移模型與一個去噪器（兩者皆不可變，可跨執行緒共用）
    """

    def __init__(self, transition: TransitionModel, denoiser: Denoiser, workers: int = 1) -> None:
        if denoiser.K != transition.K:
            raise InvalidParameterError(
                f"denoiser K={denoiser.K} does not match transition K={transition.K}"
            )
        if workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {workers}", field="workers")
        self.transition = transition
        self.denoiser = denoiser
        self.workers = workers

    @property
    def T(self) -> int:
        return self.transition.T

    def x0_probs(self, query: DenoiserQuery, s: float) -> np.ndarray:
        cond = self.denoiser.predict(query)
        if s == 0:
            return cond
        uncond = self.denoiser.predict(query.unconditional())
        return np.exp(guided_log_probs(_log(cond), _log(uncond), s))

    def reverse_step(
        self,
        z_t: TokenSequence,
        t: int,
        s: float,
        rng: np.random.Generator,
        *,
        position_offset: int = 0,
    ) -> TokenSequence:
        """One draw of z_{t-1} ~ p_θ(z_{t-1} | z_t, y); sentinels only at the ends of ``z_t``."""
        self.transition.schedule.check_step(t)
        query = DenoiserQuery.from_sequence(z_t, t, position_offset=position_offset)
        probs = self.x0_probs(query, s)
        mixture = self.transition.posterior_mixture(z_t.states, probs, t)
        return z_t.with_states(sample_categorical(mixture, rng))

    def denoise(
        self,
        z: TokenSequence,
        start: int,
        stop: int,
        s: float,
        rng: np.random.Generator,
        *,
        position_offset: int = 0,
    ) -> TokenSequence:
        """Apply reverse steps t = start, start-1, ..., stop+1."""
        for t in range(start, stop, -1):
            z = self.reverse_step(z, t, s, rng, position_offset=position_offset)
        return z

    def _finish(self, z: TokenSequence) -> TokenSequence:
        if z.has_mask():
            raise SamplingError(z.mask_count())
        return z

    def generate_single(self, condition: int, length: int, s: float, rng: np.random.Generator) -> TokenSequence:
        prior = TokenSequence.masked([Segment(condition=condition, length=length)], self.transition.mask_id)
        return self._finish(self.denoise(prior, self.T, 0, s, rng))

    def generate_multi(self, plan: GenerationPlan) -> TokenSequence:
        plan.check_steps(self.T)
        T_s = plan.independent_from
        s = plan.guidance_scale
        joint_rng = substream(plan.seed, 0)
        z = TokenSequence.masked(plan.segments, self.transition.mask_id)
        z = self.denoise(z, self.T, T_s, s, joint_rng)
        logger.debug("joint phase done steps=%d segments=%d", self.T - T_s, plan.N)

        parts = z.segments()
        offsets = z.boundaries[:-1]
        streams = [joint_rng] + [substream(plan.seed, i) for i in range(1, plan.N)]

        def run(i: int) -> TokenSequence:
            return self.denoise(parts[i], T_s, 0, s, streams[i], position_offset=offsets[i])

        if self.workers > 1 and plan.N > 1:
            with ThreadPoolExecutor(max_workers=min(self.workers, plan.N)) as pool:
                done = list(pool.map(run, range(plan.N)))
        else:
            done = [run(i) for i in range(plan.N)]
        return self._finish(TokenSequence.concat(done))


class SamplingService:
    def __init__(self, token_repo: TokenRepository):
        self.token_repo = token_repo

    def generate(
        self,
        sampler: Sampler,
        *,
        condition: int,
        length: int,
        guidance_scale: float,
        seed: int,
        count: int,
        path: Path,
    ) -> list[GeneratedSequence]:
        """``count`` single-motion samples; with count > 1 sample k uses derive_seed(seed, k)."""
        plan = GenerationPlan(
            segments=(Segment(condition=condition, length=length),),
            independent_from=0,
            guidance_scale=guidance_scale,
            seed=seed,
        )
        records = []
        for k in range(self._check_count(count)):
            sample_seed = derive_seed(seed, k) if count > 1 else seed
            z = sampler.generate_single(condition, length, guidance_scale, substream(sample_seed, 0))
            records.append(GeneratedSequence(sequence=z, seed=sample_seed, plan_digest=plan.digest()))
        self.token_repo.save(records, path)
        logger.info("generated count=%d condition=%d length=%d path=%s", count, condition, length, path)
        return records

    def generate_multi(
        self,
        sampler: Sampler,
        *,
        segments: Sequence[Segment],
        independent_from: int,
        guidance_scale: float,
        seed: int,
        count: int,
        path: Path,
    ) -> list[GeneratedSequence]:
        records = []
        for k in range(self._check_count(count)):
            plan = GenerationPlan(
                segments=tuple(segments),
                independent_from=independent_from,
                guidance_scale=guidance_scale,
                seed=derive_seed(seed, k) if count > 1 else seed,
            )
            z = sampler.generate_multi(plan)
            records.append(GeneratedSequence(sequence=z, seed=plan.seed, plan_digest=plan.digest()))
        self.token_repo.save(records, path)
        logger.info(
            "generated multi count=%d segments=%d T_s=%d path=%s", count, len(segments), independent_from, path
        )
        return records

    @staticmethod
    def _check_count(count: int) -> int:
        if count < 1:
            raise InvalidParameterError(f"count must be >= 1, got {count}", field="count")
        return count
