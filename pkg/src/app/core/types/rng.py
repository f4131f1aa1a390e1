"""
隨機數流約定

所有隨機性都由單一根種子衍生：
- root_stream(seed)：根串流
- substream(seed, index)：以 SeedSequence 的 spawn_key 分裂出的子串流，
  同一 (seed, index) 永遠得到相同序列，且不同 index 之間互不重疊。
"""
from __future__ import annotations

import numpy as np


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for child stream ``index`` of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def root_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed))


def derive_seed(seed: int, index: int) -> int:
    """Integer seed for the ``index``-th child run of ``seed``."""
    state = np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(1, dtype=np.uint32)
    return int(state[0])


def sample_categorical(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Draw one state per row of ``probs`` by inverse CDF.

    Exactly one uniform is consumed per row, so the number of draws depends
    only on the row count.
    """
    probs = np.asarray(probs, dtype=np.float64)
    u = rng.random(probs.shape[0])
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1).astype(np.int64)
