"""噪聲排程與轉移矩陣（值對象）"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.core.exceptions.common import InvalidParameterError

COLUMN_TOLERANCE = 1e-12


def _frozen(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """
    每步的 α_t、γ_t 與累積值 ᾱ_t、γ̄_t

    陣列長度為 T + 1，索引 0 為 t = 0（α_0 = 1、γ_0 = 0、ᾱ_0 = 1、γ̄_0 = 0），
    因此 ``alpha[t]`` 直接對應步驟 t。
    """

    alpha: np.ndarray
    gamma: np.ndarray
    alpha_bar: np.ndarray
    gamma_bar: np.ndarray
    eta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma", "alpha_bar", "gamma_bar"):
            values = np.asarray(getattr(self, name), dtype=np.float64)
            if values.ndim != 1 or values.shape[0] < 2:
                raise InvalidParameterError(f"{name} must hold T + 1 >= 2 values", field=name)
            object.__setattr__(self, name, _frozen(values))
        if len({self.alpha.shape, self.gamma.shape, self.alpha_bar.shape, self.gamma_bar.shape}) != 1:
            raise InvalidParameterError("schedule arrays must share one length")
        a, g = self.alpha[1:], self.gamma[1:]
        if np.any(a <= 0) or np.any(a > 1):
            raise InvalidParameterError("alpha_t must lie in (0, 1]", field="alpha")
        if np.any(g < 0) or np.any(g >= 1):
            raise InvalidParameterError("gamma_t must lie in [0, 1)", field="gamma")
        if np.any(a + g > 1 + COLUMN_TOLERANCE):
            raise InvalidParameterError("alpha_t + gamma_t must not exceed 1", field="alpha")
        if np.any(np.diff(self.alpha_bar) > 0) or np.any(np.diff(self.gamma_bar) < 0):
            raise InvalidParameterError("cumulative alpha must decrease and gamma must not")
        if np.any(self.alpha_bar + self.gamma_bar > 1 + COLUMN_TOLERANCE):
            raise InvalidParameterError("alpha_bar_t + gamma_bar_t must not exceed 1")
        if self.eta < 0:
            raise InvalidParameterError("eta must be non-negative", field="eta")

    @property
    def T(self) -> int:
        return int(self.alpha.shape[0] - 1)

    def residual(self, t: int) -> float:
        """β mass left after α_t and γ_t."""
        return float(max(1.0 - self.alpha[t] - self.gamma[t], 0.0))

    def check_step(self, t: int) -> None:
        if not 1 <= t <= self.T:
            raise InvalidParameterError(f"step t={t} outside 1..{self.T}", field="t")

    @classmethod
    def from_steps(cls, alpha: np.ndarray, gamma: np.ndarray, eta: float = 0.0) -> "NoiseSchedule":
        """Schedule from explicit per-step values for t = 1..T."""
        alpha = np.asarray(alpha, dtype=np.float64)
        gamma = np.asarray(gamma, dtype=np.float64)
        if alpha.shape != gamma.shape or alpha.ndim != 1 or alpha.size < 1:
            raise InvalidParameterError("alpha and gamma must be equal-length vectors")
        alpha_full = np.concatenate([[1.0], alpha])
        gamma_full = np.concatenate([[0.0], gamma])
        return cls(
            alpha=alpha_full,
            gamma=gamma_full,
            alpha_bar=np.cumprod(alpha_full),
            gamma_bar=1.0 - np.cumprod(1.0 - gamma_full),
            eta=eta,
        )


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """
    (K+1) x (K+1) 行隨機矩陣：entry[i, j] = P(z_t = i | z_{t-1} = j)，最後一列/行為 MASK
    """

    values: np.ndarray
    t: int

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 3:
            raise InvalidParameterError("transition matrix must be (K+1) x (K+1) with K >= 2")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def K(self) -> int:
        return int(self.values.shape[0] - 1)

    @property
    def mask_row(self) -> np.ndarray:
        return self.values[self.K, : self.K]

    def column_deviation(self) -> float:
        return float(np.max(np.abs(self.values.sum(axis=0) - 1.0)))

    def is_absorbing(self) -> bool:
        column = self.values[:, self.K]
        return bool(column[self.K] == 1.0 and np.all(column[: self.K] == 0.0))
