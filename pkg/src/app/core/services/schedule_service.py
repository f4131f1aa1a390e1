"""
排程與轉移模型

- build_schedule：線性累積排程（γ̄_t 線性上升、ᾱ_t 線性下降）
- uniform / dynamic 單步轉移矩陣 Q_t
- TransitionModel：快取 Q_t 與 Q̄_t = Q_t ⋯ Q_1，提供前向加噪與後驗
"""
from __future__ import annotations

import logging
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.special import softmax

from app.core.domain.codebook import Codebook, DistanceKind, RankMatrix
from app.core.domain.generation import GeneratedSequence
from app.core.domain.reports import AuditRow
from app.core.domain.schedule import NoiseSchedule, TransitionMatrix
from app.core.domain.tokens import TokenSequence
from app.core.exceptions.common import InvalidParameterError, InvalidStateError
from app.core.exceptions.schedule import ScheduleError, UnreachableStateError
from app.core.repositories.token_repository import TokenRepository
from app.core.services.codebook_service import distance_rank_matrix
from app.core.types.rng import sample_categorical, substream

logger = logging.getLogger(__name__)

# Posterior normalisers below this are treated as zero.
REACHABLE_FLOOR = 1e-300


def build_schedule(T: int, gamma_max: float, alpha_min: float, eta: float = 0.0) -> NoiseSchedule:
    """γ̄_t = gamma_max·t/T, ᾱ_t = 1 - (1 - alpha_min)·t/T; per-step values recovered from ratios."""
    if T < 1:
        raise InvalidParameterError(f"T must be >= 1, got {T}", field="T")
    if not 0 < gamma_max < 1:
        raise InvalidParameterError(f"gamma_max must lie in (0, 1), got {gamma_max}", field="gamma_max")
    if not 0 < alpha_min < 1 - gamma_max:
        raise InvalidParameterError(
            f"alpha_min must lie in (0, 1 - gamma_max), got {alpha_min}", field="alpha_min"
        )
    steps = np.arange(T + 1, dtype=np.float64)
    alpha_bar = 1.0 - (1.0 - alpha_min) * steps / T
    gamma_bar = gamma_max * steps / T
    alpha = np.ones(T + 1)
    gamma = np.zeros(T + 1)
    alpha[1:] = alpha_bar[1:] / alpha_bar[:-1]
    gamma[1:] = (gamma_bar[1:] - gamma_bar[:-1]) / (1.0 - gamma_bar[:-1])
    residual = 1.0 - alpha - gamma
    for t in range(1, T + 1):
        if residual[t] < 0:
            raise ScheduleError(t, float(residual[t]))
    return NoiseSchedule(alpha=alpha, gamma=gamma, alpha_bar=alpha_bar, gamma_bar=gamma_bar, eta=eta)


def _absorbing_frame(K: int, gamma: float) -> np.ndarray:
    q = np.zeros((K + 1, K + 1))
    q[K, :K] = gamma
    q[K, K] = 1.0
    return q


def uniform_transition_matrix(sched: NoiseSchedule, t: int, K: int) -> TransitionMatrix:
    sched.check_step(t)
    q = _absorbing_frame(K, sched.gamma[t])
    q[:K, :K] = sched.residual(t) / K
    q[np.arange(K), np.arange(K)] += sched.alpha[t]
    return TransitionMatrix(values=q, t=t)


def beta_masses(sched: NoiseSchedule, t: int, K: int) -> np.ndarray:
    """β(t, d) for d = 1..K (index d - 1)."""
    d = np.arange(1, K + 1, dtype=np.float64)
    weights = softmax(sched.eta * (t / sched.T) * (d / K))
    return sched.residual(t) * weights


def dynamic_transition_matrix(sched: NoiseSchedule, t: int, ranks: RankMatrix) -> TransitionMatrix:
    """
    Q_t[i, j] = α_t·δ_ij + β(t, ranks[i, j]).

    Every rank column is a permutation of 1..K, so one softmax serves all
    columns and the diagonal (rank 1) carries α_t + β(t, 1).
    """
    sched.check_step(t)
    K = ranks.K
    q = _absorbing_frame(K, sched.gamma[t])
    q[:K, :K] = beta_masses(sched, t, K)[ranks.ranks - 1]
    q[np.arange(K), np.arange(K)] += sched.alpha[t]
    return TransitionMatrix(values=q, t=t)


class TransitionModel:
    """
    單一配置下的 Q_t 與 Q̄_t 快取

    ranks 為 None 時使用均勻 β_t，否則使用動態 β(t, d)。
    所有矩陣於首次使用時建立一次，之後唯讀。
    """

    def __init__(self, schedule: NoiseSchedule, K: int, ranks: RankMatrix | None = None) -> None:
        if K < 2:
            raise InvalidParameterError(f"K must be >= 2, got {K}", field="K")
        if ranks is not None and ranks.K != K:
            raise InvalidParameterError(f"rank matrix is {ranks.K}x{ranks.K}, expected K={K}")
        self.schedule = schedule
        self.K = K
        self.ranks = ranks

    @property
    def T(self) -> int:
        return self.schedule.T

    @property
    def mask_id(self) -> int:
        return self.K

    @property
    def dynamic(self) -> bool:
        return self.ranks is not None

    @cached_property
    def _steps(self) -> np.ndarray:
        stack = np.empty((self.T + 1, self.K + 1, self.K + 1))
        stack[0] = np.eye(self.K + 1)
        for t in range(1, self.T + 1):
            if self.ranks is None:
                stack[t] = uniform_transition_matrix(self.schedule, t, self.K).values
            else:
                stack[t] = dynamic_transition_matrix(self.schedule, t, self.ranks).values
        stack.setflags(write=False)
        return stack

    @cached_property
    def _cumulative(self) -> np.ndarray:
        steps = self._steps
        stack = np.empty_like(steps)
        stack[0] = np.eye(self.K + 1)
        for t in range(1, self.T + 1):
            stack[t] = steps[t] @ stack[t - 1]
        stack.setflags(write=False)
        logger.debug("cumulative matrices built T=%d K=%d dynamic=%s", self.T, self.K, self.dynamic)
        return stack

    @property
    def step_stack(self) -> np.ndarray:
        """Read-only (T+1, K+1, K+1) stack of Q_t; index 0 is the identity."""
        return self._steps

    @property
    def cumulative_stack(self) -> np.ndarray:
        return self._cumulative

    def step_matrix(self, t: int) -> TransitionMatrix:
        self.schedule.check_step(t)
        return TransitionMatrix(values=self._steps[t], t=t)

    def cumulative_matrix(self, t: int) -> TransitionMatrix:
        """Q̄_t for 0 <= t <= T (Q̄_0 is the identity)."""
        if not 0 <= t <= self.T:
            raise InvalidParameterError(f"step t={t} outside 0..{self.T}", field="t")
        return TransitionMatrix(values=self._cumulative[t], t=t)

    def forward_sample(self, z0: TokenSequence, t: int, rng: np.random.Generator) -> TokenSequence:
        """z_t ~ q(z_t | z_0) per position from the Q̄_t column of its clean token."""
        if z0.mask_id != self.K:
            raise InvalidParameterError(f"sequence vocabulary K={z0.mask_id} does not match K={self.K}")
        if z0.has_mask():
            raise InvalidStateError("forward corruption needs a clean sequence without MASK")
        if t == 0:
            return z0
        probs = self.cumulative_matrix(t).values[:, z0.states].T
        return z0.with_states(sample_categorical(probs, rng))

    def forward_sample_many(self, z0: np.ndarray, steps: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Flat variant: position p corrupted to step ``steps[p]``."""
        probs = self._cumulative[steps, :, z0]
        return sample_categorical(probs, rng)

    def posterior(self, z_t: int, z0: int, t: int) -> np.ndarray:
        """q(z_{t-1} | z_t, z_0) over the K + 1 states."""
        self.schedule.check_step(t)
        if not 0 <= z0 < self.K:
            raise InvalidParameterError(f"z0 must be a token in 0..{self.K - 1}", field="z0")
        if not 0 <= z_t <= self.K:
            raise InvalidParameterError(f"z_t must lie in 0..{self.K}", field="z_t")
        normaliser = self._cumulative[t][z_t, z0]
        if normaliser < REACHABLE_FLOOR:
            raise UnreachableStateError(t, z_t=z_t, z0=z0)
        return self._steps[t][z_t, :] * self._cumulative[t - 1][:, z0] / normaliser

    def posterior_many(self, z_t: np.ndarray, z0: np.ndarray, steps: np.ndarray) -> np.ndarray:
        """Row p is q(z_{t-1} | z_t[p], z0[p]) at step steps[p] (all steps >= 1)."""
        normaliser = self._cumulative[steps, z_t, z0]
        bad = np.flatnonzero(normaliser < REACHABLE_FLOOR)
        if bad.size:
            p = int(bad[0])
            raise UnreachableStateError(int(steps[p]), z_t=int(z_t[p]), z0=int(z0[p]), position=p)
        rows = self._steps[steps, z_t, :]
        cols = self._cumulative[steps - 1, :, z0]
        return rows * cols / normaliser[:, None]

    def mixture_terms(self, z_t: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Pieces of the posterior mixture for positions in state ``z_t`` at step ``t``:
        Q_t rows (P, K+1), Q̄_t normalisers (P, K) and Q̄_{t-1} token columns (K+1, K).
        """
        self.schedule.check_step(t)
        rows = self._steps[t][z_t, :]
        normaliser = self._cumulative[t][z_t, : self.K]
        columns = self._cumulative[t - 1][:, : self.K]
        return rows, normaliser, columns

    def posterior_mixture(self, z_t: np.ndarray, x0_probs: np.ndarray, t: int) -> np.ndarray:
        """
        p(z_{t-1} | z_t) = Σ_k q(z_{t-1} | z_t, k) · p(k) per position.

        A candidate k with p(k) > 0 from which z_t is unreachable raises
        UnreachableStateError carrying the position.
        """
        rows, normaliser, columns = self.mixture_terms(z_t, t)
        reachable = normaliser >= REACHABLE_FLOOR
        bad = np.argwhere(~reachable & (x0_probs > 0))
        if bad.size:
            p, k = (int(v) for v in bad[0])
            raise UnreachableStateError(t, z_t=int(z_t[p]), z0=k, position=p)
        weights = np.divide(x0_probs, normaliser, out=np.zeros_like(x0_probs), where=reachable)
        return rows * (weights @ columns.T)

    def audit_rows(self) -> list[AuditRow]:
        rows = []
        K = self.K
        for t in range(1, self.T + 1):
            step = self.step_matrix(t)
            cumulative = self.cumulative_matrix(t)
            beta = step.values[:K, :K].copy()
            beta[np.arange(K), np.arange(K)] -= self.schedule.alpha[t]
            rows.append(
                AuditRow(
                    t=t,
                    step_deviation=step.column_deviation(),
                    cumulative_deviation=cumulative.column_deviation(),
                    mask_mass=float(cumulative.mask_row.min()),
                    beta_min=float(beta.min()),
                    beta_max=float(beta.max()),
                )
            )
        return rows


def build_transition(
    cb: Codebook,
    *,
    T: int,
    gamma_max: float,
    alpha_min: float,
    eta: float,
    dynamic: bool = True,
    distance: DistanceKind | str = DistanceKind.L2,
) -> TransitionModel:
    """Transition model for ``cb``: dynamic β from its rank matrix, or uniform β."""
    schedule = build_schedule(T, gamma_max, alpha_min, eta)
    ranks = distance_rank_matrix(cb, distance) if dynamic else None
    return TransitionModel(schedule, cb.K, ranks)


class CorruptionService:
    def __init__(self, token_repo: TokenRepository):
        self.token_repo = token_repo

    def corrupt(
        self,
        transition: TransitionModel,
        *,
        source_path: Path,
        t: int,
        seed: int,
        path: Path,
    ) -> list[GeneratedSequence]:
        """Forward-corrupt every record to step ``t``; record k draws from substream(seed, k)."""
        if not 0 <= t <= transition.T:
            raise InvalidParameterError(f"step t={t} outside 0..{transition.T}", field="t")
        records = self.token_repo.load(source_path)
        out = []
        for k, record in enumerate(records):
            z_t = transition.forward_sample(record.sequence, t, substream(seed, k))
            out.append(
                GeneratedSequence(
                    sequence=z_t,
                    seed=seed,
                    plan_digest=record.plan_digest,
                    step=t,
                    source=record.sequence.states,
                )
            )
        self.token_repo.save(out, path)
        masked = sum(r.sequence.mask_count() for r in out)
        total = sum(len(r.sequence) for r in out)
        logger.info("corrupted records=%d t=%d mask_fraction=%.4f path=%s", len(out), t, masked / total, path)
        return out


def render_audit(rows: list[AuditRow]) -> str:
    lines = [f"{'t':>5} {'step_dev':>12} {'cum_dev':>12} {'mask_mass':>14} {'beta_min':>14} {'beta_max':>14}"]
    for r in rows:
        lines.append(
            f"{r.t:>5d} {r.step_deviation:>12.3e} {r.cumulative_deviation:>12.3e} "
            f"{r.mask_mass:>14.8f} {r.beta_min:>14.6e} {r.beta_max:>14.6e}"
        )
    return "\n".join(lines) + "\n"
