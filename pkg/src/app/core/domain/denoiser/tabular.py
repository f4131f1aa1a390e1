"""
表格式去噪器

logits(c, b, z, l, r) = U_cur[b, z] + U_left[b, l] + U_right[b, r]
                        + [c != NULL] * (C_cur[c, b, z] + C_left[c, b, l] + C_right[c, b, r])

z 為目前狀態（含 MASK），l / r 為左右鄰居（含 MASK 與邊界哨兵），b 為步驟桶。
共享表 U 即 NULL 條件所見；條件表 C 初始為 0，從未訓練過的條件與 NULL 預測相同。
"""
from __future__ import annotations

import numpy as np
from scipy.special import softmax

from app.core.domain.tokens import NULL_CONDITION
from app.core.exceptions.common import InvalidParameterError
from app.core.ports.denoiser import Denoiser, DenoiserQuery

TABLE_NAMES = (
    "shared_current",
    "shared_left",
    "shared_right",
    "cond_current",
    "cond_left",
    "cond_right",
)


def table_shapes(V: int, B: int, K: int) -> dict[str, tuple[int, ...]]:
    return {
        "shared_current": (B, K + 1, K),
        "shared_left": (B, K + 2, K),
        "shared_right": (B, K + 2, K),
        "cond_current": (V, B, K + 1, K),
        "cond_left": (V, B, K + 2, K),
        "cond_right": (V, B, K + 2, K),
    }


class TabularDenoiser(Denoiser):
    def __init__(self, V: int, B: int, K: int, T: int, tables: dict[str, np.ndarray] | None = None) -> None:
        if V < 1 or K < 2 or T < 1 or not 1 <= B <= T:
            raise InvalidParameterError(f"invalid table layout V={V} B={B} K={K} T={T}")
        self.V, self.B, self.T = V, B, T
        self._K = K
        shapes = table_shapes(V, B, K)
        if tables is None:
            tables = {name: np.zeros(shape) for name, shape in shapes.items()}
        if set(tables) != set(TABLE_NAMES):
            raise InvalidParameterError(f"expected tables {TABLE_NAMES}", field="tables")
        self.tables: dict[str, np.ndarray] = {}
        for name in TABLE_NAMES:
            table = np.array(tables[name], dtype=np.float64, copy=True)
            if table.shape != shapes[name]:
                raise InvalidParameterError(
                    f"table {name} has shape {table.shape}, expected {shapes[name]}", field=name
                )
            if not np.all(np.isfinite(table)):
                raise InvalidParameterError(f"table {name} holds non-finite logits", field=name)
            self.tables[name] = table

    @classmethod
    def initialize(
        cls,
        V: int,
        B: int,
        K: int,
        T: int,
        *,
        seed: int = 0,
        scale: float = 0.0,
        conditional_scale: float = 0.0,
    ) -> "TabularDenoiser":
        """Shared tables ~ N(0, scale²); condition tables ~ N(0, conditional_scale²)."""
        rng = np.random.default_rng(seed)
        tables = {}
        for name, shape in table_shapes(V, B, K).items():
            sd = conditional_scale if name.startswith("cond_") else scale
            tables[name] = rng.normal(0.0, sd, size=shape) if sd > 0 else np.zeros(shape)
        return cls(V, B, K, T, tables)

    @property
    def K(self) -> int:
        return self._K

    @property
    def mask_id(self) -> int:
        return self._K

    @property
    def boundary_id(self) -> int:
        return self._K + 1

    def copy(self) -> "TabularDenoiser":
        return TabularDenoiser(self.V, self.B, self._K, self.T, self.tables)

    def buckets(self, steps: np.ndarray) -> np.ndarray:
        steps = np.asarray(steps, dtype=np.int64)
        if np.any(steps < 1) or np.any(steps > self.T):
            raise InvalidParameterError(f"steps must lie in 1..{self.T}", field="t")
        return np.minimum(self.B - 1, (steps - 1) * self.B // self.T)

    def _check(self, query: DenoiserQuery) -> None:
        if query.K != self._K:
            raise InvalidParameterError(f"query vocabulary K={query.K} does not match model K={self._K}")
        if np.any(query.conditions < NULL_CONDITION) or np.any(query.conditions > self.V):
            raise InvalidParameterError(f"conditions must lie in 0..{self.V}", field="conditions")

    def logits(self, query: DenoiserQuery) -> np.ndarray:
        self._check(query)
        b = self.buckets(query.steps)
        t = self.tables
        out = (
            t["shared_current"][b, query.states]
            + t["shared_left"][b, query.left]
            + t["shared_right"][b, query.right]
        )
        conditioned = query.conditions != NULL_CONDITION
        if np.any(conditioned):
            c = query.conditions[conditioned] - 1
            bc = b[conditioned]
            out[conditioned] += (
                t["cond_current"][c, bc, query.states[conditioned]]
                + t["cond_left"][c, bc, query.left[conditioned]]
                + t["cond_right"][c, bc, query.right[conditioned]]
            )
        return out

    def predict(self, query: DenoiserQuery) -> np.ndarray:
        return softmax(self.logits(query), axis=1)

    def gradient(self, query: DenoiserQuery, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        """Scatter per-position logit gradients into table-shaped gradients."""
        self._check(query)
        b = self.buckets(query.steps)
        grads = {name: np.zeros_like(table) for name, table in self.tables.items()}
        np.add.at(grads["shared_current"], (b, query.states), dlogits)
        np.add.at(grads["shared_left"], (b, query.left), dlogits)
        np.add.at(grads["shared_right"], (b, query.right), dlogits)
        conditioned = query.conditions != NULL_CONDITION
        if np.any(conditioned):
            c = query.conditions[conditioned] - 1
            bc = b[conditioned]
            g = dlogits[conditioned]
            np.add.at(grads["cond_current"], (c, bc, query.states[conditioned]), g)
            np.add.at(grads["cond_left"], (c, bc, query.left[conditioned]), g)
            np.add.at(grads["cond_right"], (c, bc, query.right[conditioned]), g)
        return grads

    def apply_gradient(self, grads: dict[str, np.ndarray], learning_rate: float) -> None:
        for name in TABLE_NAMES:
            self.tables[name] -= learning_rate * grads[name]

    def same_tables(self, other: "TabularDenoiser") -> bool:
        return all(np.array_equal(self.tables[n], other.tables[n]) for n in TABLE_NAMES)
