"""
持久化紀錄 Schema

資料集、token 與評估檔皆為 JSON lines，每行一筆以下的紀錄。
"""
from typing import Any, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class DatasetRecordSchema(BaseModel):
    """訓練樣本紀錄"""
    model_config = ConfigDict(extra="forbid")

    condition: int = Field(..., ge=1, description="動作條件編號")
    tokens: List[int] = Field(..., min_length=1)


class TokenRecordSchema(BaseModel):
    """生成或加噪後的 token 序列紀錄"""
    model_config = ConfigDict(extra="forbid")

    seed: int
    plan_digest: str
    mask_id: int = Field(..., ge=2, description="MASK 狀態編號（= K）")
    boundaries: List[int] = Field(..., min_length=2)
    conditions: List[int] = Field(..., min_length=1, description="每段的條件")
    tokens: List[int] = Field(..., min_length=1)
    step: Optional[int] = Field(None, ge=0, description="加噪步驟（僅 corrupt）")
    source: Optional[List[int]] = Field(None, description="加噪前的序列（僅 corrupt）")


class EvaluationRecordSchema(BaseModel):
    """單一指標值"""
    model_config = ConfigDict(extra="forbid")

    metric: str
    value: float
    sequence: Optional[int] = None
    window: Optional[Tuple[int, int]] = None
    parameters: Optional[dict[str, Any]] = None


class ManifestSchema(BaseModel):
    """執行紀錄"""
    model_config = ConfigDict(extra="forbid")

    command: str
    version: str
    config_digest: str
    seed: int
    wall_clock_seconds: float = Field(..., ge=0)
    created_at: str
    inputs: dict[str, str] = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
    details: dict[str, Any] = Field(default_factory=dict)
