"""
合成資料集

每個條件對應一組正弦軌跡（各維度有條件專屬的頻率與相位），
於每個 token 時刻取樣後量化為碼本 token。
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from app.core.domain.codebook import FRAMES_PER_TOKEN, Codebook
from app.core.domain.dataset import DatasetRecord
from app.core.exceptions.common import InvalidParameterError
from app.core.repositories.dataset_repository import DatasetRepository
from app.core.services.codebook_service import quantize_many
from app.core.types.rng import substream

logger = logging.getLogger(__name__)

# cycles per token at the slowest condition
BASE_FREQUENCY = 0.05
PHASE_JITTER = 0.3
AMPLITUDE_JITTER = 0.1


def make_dataset(
    cb: Codebook,
    *,
    conditions: int,
    sequences_per_condition: int,
    length: int,
    seed: int,
) -> list[DatasetRecord]:
    """
    ``conditions`` x ``sequences_per_condition`` records of ``length`` tokens.

    Condition c draws its per-dimension phases from substream(seed, c); each
    sequence then jitters phase and amplitude, so sequences of one condition
    stay close to each other and far from other conditions.
    """
    if conditions < 1 or sequences_per_condition < 1 or length < 1:
        raise InvalidParameterError(
            "conditions, sequences_per_condition and length must all be >= 1", field="dataset"
        )
    centre = cb.entries.mean(axis=0)
    spread = cb.entries.std(axis=0)
    tau = (np.arange(length) + 0.5) * FRAMES_PER_TOKEN
    records = []
    for c in range(1, conditions + 1):
        rng = substream(seed, c)
        frequency = BASE_FREQUENCY * c / FRAMES_PER_TOKEN
        phases = rng.uniform(0.0, 2 * np.pi, size=cb.D)
        for _ in range(sequences_per_condition):
            shift = rng.normal(0.0, PHASE_JITTER)
            amplitude = 1.0 + rng.normal(0.0, AMPLITUDE_JITTER)
            wave = np.sin(2 * np.pi * frequency * tau[:, None] + phases[None, :] + shift)
            vectors = centre + spread * amplitude * wave
            records.append(DatasetRecord(condition=c, tokens=quantize_many(vectors, cb)))
    return records


class DatasetService:
    def __init__(self, dataset_repo: DatasetRepository):
        self.dataset_repo = dataset_repo

    def create(
        self,
        cb: Codebook,
        *,
        conditions: int,
        sequences_per_condition: int,
        length: int,
        seed: int,
        path: Path,
    ) -> list[DatasetRecord]:
        records = make_dataset(
            cb,
            conditions=conditions,
            sequences_per_condition=sequences_per_condition,
            length=length,
            seed=seed,
        )
        self.dataset_repo.save(records, path)
        logger.info("dataset written records=%d conditions=%d path=%s", len(records), conditions, path)
        return records

    def load(self, path: Path) -> list[DatasetRecord]:
        return self.dataset_repo.load(path)
