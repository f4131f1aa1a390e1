"""
訓練服務

L = L_vlb + λ·E[-log p_θ(z_0 | z_t, y)]，t 對每筆樣本均勻抽取；
L_vlb 為整條鏈的總和，以 T·L_t 估計，位置加總、樣本平均：
- t = 1：L_vlb 為 -log p_θ(z_0 | z_1, y)
- t > 1：L_vlb 為 KL(q(z_{t-1} | z_t, z_0) ‖ p_θ(z_{t-1} | z_t, y))，p_θ 為後驗對 z̃_0 預測的混合
梯度經 softmax 解析計算，再散佈回各個表。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from tqdm import tqdm

from app.core.domain.dataset import DatasetRecord
from app.core.domain.denoiser import TabularDenoiser
from app.core.domain.tokens import NULL_CONDITION
from app.core.exceptions.common import InvalidParameterError
from app.core.exceptions.denoiser import TrainingDivergedError
from app.core.exceptions.schedule import UnreachableStateError
from app.core.ports.denoiser import DenoiserQuery
from app.core.repositories.dataset_repository import DatasetRepository
from app.core.repositories.denoiser_repository import DenoiserRepository
from app.core.services.schedule_service import REACHABLE_FLOOR, TransitionModel
from app.core.types.rng import root_stream, substream

logger = logging.getLogger(__name__)

# Substream reserved for the fixed-noise loss evaluations before/after training.
EVALUATION_STREAM = 1


@dataclass
class LossResult:
    value: float
    vlb: float
    denoising: float
    gradients: dict[str, np.ndarray]


@dataclass
class TrainingResult:
    model: TabularDenoiser
    curve: list[float] = field(default_factory=list)
    initial_loss: float = float("nan")
    final_loss: float = float("nan")


def _kl_terms(
    transition: TransitionModel,
    z_t: np.ndarray,
    z0: np.ndarray,
    steps: np.ndarray,
    probs: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-position KL(q ‖ p_θ) and its gradient with respect to the z̃_0 probabilities."""
    q = transition.posterior_many(z_t, z0, steps)
    rows = transition.step_stack[steps, z_t, :]
    normaliser = transition.cumulative_stack[steps, z_t, : transition.K]
    columns = transition.cumulative_stack[steps - 1, :, : transition.K]
    if np.any(normaliser < REACHABLE_FLOOR):
        p, k = (int(v) for v in np.argwhere(normaliser < REACHABLE_FLOOR)[0])
        raise UnreachableStateError(int(steps[p]), z_t=int(z_t[p]), z0=k, position=p)
    scaled = probs / normaliser
    model = rows * np.einsum("pik,pk->pi", columns, scaled)
    support = q > 0
    ratio = np.divide(q, model, out=np.zeros_like(q), where=support)
    log_q = np.log(q, out=np.zeros_like(q), where=support)
    log_m = np.log(model, out=np.zeros_like(model), where=support)
    kl = np.sum(np.where(support, q * (log_q - log_m), 0.0), axis=1)
    grad_probs = -np.einsum("pi,pik->pk", ratio * rows, columns) / normaliser
    return kl, grad_probs


def loss(
    model: TabularDenoiser,
    batch: Sequence[DatasetRecord],
    transition: TransitionModel,
    loss_coefficient: float,
    rng: np.random.Generator,
    *,
    conditions: Sequence[int] | None = None,
) -> LossResult:
    """
    Batch loss and gradient tables.

    Draws one t per record and one z_t per position from ``rng``. Per record
    the bound term is T·L_t summed over positions; records are averaged.
    """
    if not batch:
        raise InvalidParameterError("loss needs a non-empty batch", field="batch")
    if loss_coefficient < 0:
        raise InvalidParameterError("loss coefficient must be >= 0", field="loss_coefficient")
    if model.K != transition.K or model.T != transition.T:
        raise InvalidParameterError("model and transition model disagree on K or T")
    K = transition.K
    conds = [r.condition for r in batch] if conditions is None else list(conditions)
    lengths = np.array([r.length for r in batch], dtype=np.int64)
    record_steps = rng.integers(1, transition.T + 1, size=len(batch))
    z0 = np.concatenate([r.tokens for r in batch])
    if np.any(z0 < 0) or np.any(z0 >= K):
        raise InvalidParameterError(f"record tokens must lie in 0..{K - 1}", field="tokens")
    steps = np.repeat(record_steps, lengths)
    z_t = transition.forward_sample_many(z0, steps, rng)

    query = DenoiserQuery.from_batch(
        np.split(z_t, np.cumsum(lengths)[:-1]), conds, record_steps, K
    )
    probs = model.predict(query)
    positions = np.arange(z0.size)
    weight = np.full(z0.size, 1.0 / len(batch))
    T = transition.T

    true_prob = probs[positions, z0]
    ce = -np.log(true_prob)
    onehot = np.zeros_like(probs)
    onehot[positions, z0] = 1.0
    d_ce = probs - onehot

    vlb = ce.copy()
    d_vlb = d_ce.copy()
    later = steps > 1
    if np.any(later):
        kl, grad_probs = _kl_terms(transition, z_t[later], z0[later], steps[later], probs[later])
        p = probs[later]
        vlb[later] = kl
        d_vlb[later] = p * (grad_probs - np.sum(p * grad_probs, axis=1, keepdims=True))

    value_vlb = T * float(np.sum(weight * vlb))
    value_ce = float(np.sum(weight * ce))
    dlogits = weight[:, None] * (T * d_vlb + loss_coefficient * d_ce)
    return LossResult(
        value=value_vlb + loss_coefficient * value_ce,
        vlb=value_vlb,
        denoising=value_ce,
        gradients=model.gradient(query, dlogits),
    )


def train(
    model: TabularDenoiser,
    dataset: Sequence[DatasetRecord],
    transition: TransitionModel,
    *,
    epochs: int,
    learning_rate: float,
    null_prob: float = 0.1,
    loss_coefficient: float = 5e-4,
    seed: int = 0,
    batch_size: int | None = None,
    progress: bool = False,
) -> TrainingResult:
    """
    Plain gradient descent; each record's condition is swapped for NULL with
    probability ``null_prob`` at every step. Mutates and returns ``model``.
    """
    if not dataset:
        raise InvalidParameterError("training needs a non-empty dataset", field="dataset")
    if epochs < 0:
        raise InvalidParameterError("epochs must be >= 0", field="epochs")
    if not 0 <= null_prob <= 1:
        raise InvalidParameterError(f"null_prob must lie in [0, 1], got {null_prob}", field="null_prob")
    if learning_rate <= 0:
        raise InvalidParameterError("learning rate must be positive", field="learning_rate")
    size = len(dataset) if not batch_size else min(batch_size, len(dataset))

    def evaluate() -> float:
        return loss(model, dataset, transition, loss_coefficient, substream(seed, EVALUATION_STREAM)).value

    rng = root_stream(seed)
    result = TrainingResult(model=model, initial_loss=evaluate())
    logger.info(
        "training start records=%d epochs=%d lr=%g null_prob=%g initial_loss=%.6f",
        len(dataset), epochs, learning_rate, null_prob, result.initial_loss,
    )
    for epoch in tqdm(range(1, epochs + 1), desc="train", disable=not progress, leave=False):
        order = rng.permutation(len(dataset)) if size < len(dataset) else np.arange(len(dataset))
        batch_losses = []
        for start in range(0, len(dataset), size):
            batch = [dataset[i] for i in order[start:start + size]]
            dropped = rng.random(len(batch)) < null_prob
            conditions = [NULL_CONDITION if d else r.condition for d, r in zip(dropped, batch)]
            step = loss(model, batch, transition, loss_coefficient, rng, conditions=conditions)
            if not np.isfinite(step.value) or not all(np.all(np.isfinite(g)) for g in step.gradients.values()):
                raise TrainingDivergedError(epoch)
            model.apply_gradient(step.gradients, learning_rate)
            batch_losses.append(step.value)
        result.curve.append(float(np.mean(batch_losses)))
        logger.debug("epoch=%d loss=%.6f", epoch, result.curve[-1])

    result.final_loss = evaluate()
    if not np.isfinite(result.final_loss):
        raise TrainingDivergedError(epochs)
    if result.final_loss > result.initial_loss:
        logger.warning(
            "final loss %.6f exceeds initial loss %.6f", result.final_loss, result.initial_loss
        )
    logger.info("training done final_loss=%.6f", result.final_loss)
    return result


class TrainingService:
    def __init__(self, dataset_repo: DatasetRepository, model_repo: DenoiserRepository):
        self.dataset_repo = dataset_repo
        self.model_repo = model_repo

    def fit(
        self,
        *,
        dataset_path: Path,
        model_path: Path,
        transition: TransitionModel,
        conditions: int,
        buckets: int,
        epochs: int,
        learning_rate: float,
        null_prob: float,
        loss_coefficient: float,
        seed: int,
        init_scale: float = 0.0,
        batch_size: int | None = None,
        progress: bool = False,
    ) -> TrainingResult:
        dataset = self.dataset_repo.load(dataset_path)
        model = TabularDenoiser.initialize(
            conditions, min(buckets, transition.T), transition.K, transition.T, seed=seed, scale=init_scale
        )
        result = train(
            model,
            dataset,
            transition,
            epochs=epochs,
            learning_rate=learning_rate,
            null_prob=null_prob,
            loss_coefficient=loss_coefficient,
            seed=seed,
            batch_size=batch_size,
            progress=progress,
        )
        self.model_repo.save(result.model, model_path)
        return result
