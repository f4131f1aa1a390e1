"""
去噪器聚合

導出 oracle 與可訓練的表格式去噪器。
"""
from app.core.domain.denoiser.oracle import OracleDenoiser
from app.core.domain.denoiser.tabular import TABLE_NAMES, TabularDenoiser

__all__ = [
    "OracleDenoiser",
    "TABLE_NAMES",
    "TabularDenoiser",
]
