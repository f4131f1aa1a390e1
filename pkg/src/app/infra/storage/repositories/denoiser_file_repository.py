from math import prod
from pathlib import Path

import numpy as np

from app.core.domain.denoiser import TABLE_NAMES, TabularDenoiser
from app.core.domain.denoiser.tabular import table_shapes
from app.core.exceptions.base import DomainError
from app.core.exceptions.common import ArtifactFormatError
from app.core.repositories.denoiser_repository import DenoiserRepository
from app.infra.storage.atomic import atomic_write_text, read_text
from app.infra.storage.repositories.base_repository import (
    FORMAT_VERSION,
    format_values,
    parse_header,
    parse_values,
)

MAGIC = "tabular-denoiser"


class DenoiserFileRepository(DenoiserRepository):
    """
    模型檔

    標頭之後，每個子表先有一行 ``table <name> <d1>x<d2>x...``，
    接著以 K 個值為一行依列優先順序寫出。
    """

    def save(self, model: TabularDenoiser, path: Path) -> None:
        lines = [
            f"{MAGIC} {FORMAT_VERSION} V={model.V} B={model.B} K={model.K} T={model.T} "
            f"mask={model.mask_id} boundary={model.boundary_id}"
        ]
        for name in TABLE_NAMES:
            table = model.tables[name]
            lines.append(f"table {name} {'x'.join(str(d) for d in table.shape)}")
            lines.extend(format_values(row) for row in table.reshape(-1, model.K))
        atomic_write_text(path, "\n".join(lines) + "\n")

    def load(self, path: Path) -> TabularDenoiser:
        lines = read_text(path).splitlines()
        if not lines:
            raise ArtifactFormatError(path, "empty model file")
        header = parse_header(lines[0], MAGIC, ("V", "B", "K", "T", "mask", "boundary"), path)
        V, B, K, T = header["V"], header["B"], header["K"], header["T"]
        if header["mask"] != K or header["boundary"] != K + 1:
            raise ArtifactFormatError(path, "mask/boundary ids must be K and K+1")
        if V < 1 or K < 2 or T < 1 or not 1 <= B <= T:
            raise ArtifactFormatError(path, f"invalid layout V={V} B={B} K={K} T={T}")
        shapes = table_shapes(V, B, K)
        tables = {}
        cursor = 1
        for name in TABLE_NAMES:
            if cursor >= len(lines):
                raise ArtifactFormatError(path, f"missing table {name}")
            expected = f"table {name} {'x'.join(str(d) for d in shapes[name])}"
            if lines[cursor].strip() != expected:
                raise ArtifactFormatError(path, f"line {cursor + 1}: expected '{expected}'")
            rows = prod(shapes[name]) // K
            body = lines[cursor + 1 : cursor + 1 + rows]
            if len(body) != rows:
                raise ArtifactFormatError(path, f"table {name} is truncated")
            values = [parse_values(line, K, path, f"table {name}") for line in body]
            tables[name] = np.array(values).reshape(shapes[name])
            cursor += 1 + rows
        if any(line.strip() for line in lines[cursor:]):
            raise ArtifactFormatError(path, "trailing content after the last table")
        try:
            return TabularDenoiser(V, B, K, T, tables)
        except DomainError as exc:
            raise ArtifactFormatError(path, exc.message) from exc
