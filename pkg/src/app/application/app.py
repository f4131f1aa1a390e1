"""
應用程式初始化入口

負責：
1. 設定 logging（stderr；DEBUG 環境變數或 --verbose 時為 DEBUG 等級）
2. 初始化 IoC 容器並載入本次執行的 RunConfig
"""
import logging
import os
import sys
from typing import Optional

from app.config import RunConfig
from app.infra.containers import init_container, shutdown_container
from app.infra.containers.application import ApplicationContainer

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(verbose: bool = False) -> None:
    """
    設定根 logger

    :param verbose: 強制 DEBUG 等級
    """
    is_debug = verbose or os.getenv("DEBUG", "false").lower() == "true"
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if is_debug else logging.INFO,
        format=LOG_FORMAT,
        force=True,
    )


def create_app(
    run_config: Optional[RunConfig] = None,
    *,
    verbose: bool = False,
    container: Optional[ApplicationContainer] = None,
) -> ApplicationContainer:
    """
    創建並初始化應用程式

    :param run_config: 本次執行的配置（None 時使用預設值）
    :param verbose: 是否輸出 DEBUG 日誌
    :param container: 可選的 IoC 容器（測試時注入）
    :return: 已初始化的容器
    """
    configure_logging(verbose)
    return init_container(container, run_config)


__all__ = ["create_app", "configure_logging", "shutdown_container"]
