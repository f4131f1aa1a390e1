"""
全域容器

CLI 每次執行建立一個容器並在結束時關閉；測試可注入預先組裝的容器。
"""
from typing import Optional

from app.config import RunConfig
from app.infra.containers.application import ApplicationContainer

_container: Optional[ApplicationContainer] = None


def build_container(run_config: Optional[RunConfig] = None) -> ApplicationContainer:
    """A fresh container holding ``run_config`` (defaults when None)."""
    container = ApplicationContainer()
    container.config.from_dict((run_config or RunConfig()).model_dump(mode="json"))
    container.init_resources()
    return container


def init_container(
    container: Optional[ApplicationContainer] = None,
    run_config: Optional[RunConfig] = None,
) -> ApplicationContainer:
    """
    設定全域容器

    :param container: 直接採用的容器（測試注入）
    :param run_config: 尚無容器時用來建立新容器的配置
    """
    global _container

    if container is not None:
        _container = container
    elif _container is None:
        _container = build_container(run_config)
    return _container


def get_container() -> ApplicationContainer:
    return init_container()


def shutdown_container() -> None:
    """Release container resources; the next init_container builds a new one."""
    global _container

    if _container is not None:
        _container.shutdown_resources()
        _container = None
