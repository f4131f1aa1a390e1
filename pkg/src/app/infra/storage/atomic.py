"""
原子寫入

先寫入目標目錄下的暫存檔，再以 os.replace 取代目標；讀取失敗統一轉為
ArtifactIOError。
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

from app.core.exceptions.common import ArtifactIOError


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise ArtifactIOError(path, exc.strerror or str(exc)) from exc


def read_text(path: Path) -> str:
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(path, exc.strerror or str(exc)) from exc
