"""Oracle 去噪器（測試用）"""
from __future__ import annotations

import numpy as np

from app.core.exceptions.common import InvalidParameterError
from app.core.ports.denoiser import Denoiser, DenoiserQuery


class OracleDenoiser(Denoiser):
    """Point mass on the known clean token of every absolute position."""

    def __init__(self, truth: np.ndarray, K: int) -> None:
        truth = np.asarray(truth, dtype=np.int64)
        if truth.ndim != 1 or truth.size < 1:
            raise InvalidParameterError("truth must be a non-empty vector", field="truth")
        if np.any(truth < 0) or np.any(truth >= K):
            raise InvalidParameterError(f"truth tokens must lie in 0..{K - 1}", field="truth")
        self._truth = truth
        self._K = K

    @property
    def K(self) -> int:
        return self._K

    def predict(self, query: DenoiserQuery) -> np.ndarray:
        if query.positions.size and query.positions.max() >= self._truth.size:
            raise InvalidParameterError("truth does not cover every queried position", field="truth")
        out = np.zeros((len(query), self._K), dtype=np.float64)
        out[np.arange(len(query)), self._truth[query.positions]] = 1.0
        return out
