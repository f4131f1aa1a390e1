from pathlib import Path

import numpy as np

from app.core.domain.codebook import Codebook
from app.core.exceptions.base import DomainError
from app.core.exceptions.common import ArtifactFormatError
from app.core.repositories.codebook_repository import CodebookRepository
from app.infra.storage.atomic import atomic_write_text, read_text
from app.infra.storage.repositories.base_repository import (
    FORMAT_VERSION,
    format_values,
    parse_header,
    parse_values,
)

MAGIC = "codebook"


class CodebookFileRepository(CodebookRepository):
    """Header ``codebook v1 K= D= seed=`` then K rows of D values."""

    def save(self, codebook: Codebook, path: Path) -> None:
        lines = [f"{MAGIC} {FORMAT_VERSION} K={codebook.K} D={codebook.D} seed={codebook.seed}"]
        lines.extend(format_values(row) for row in codebook.entries)
        atomic_write_text(path, "\n".join(lines) + "\n")

    def load(self, path: Path) -> Codebook:
        lines = [line for line in read_text(path).splitlines() if line.strip()]
        if not lines:
            raise ArtifactFormatError(path, "empty codebook file")
        header = parse_header(lines[0], MAGIC, ("K", "D", "seed"), path)
        K, D = header["K"], header["D"]
        if len(lines) - 1 != K:
            raise ArtifactFormatError(path, f"expected {K} rows, got {len(lines) - 1}")
        rows = [parse_values(line, D, path, f"row {i}") for i, line in enumerate(lines[1:])]
        try:
            return Codebook(entries=np.array(rows), seed=header["seed"])
        except DomainError as exc:
            raise ArtifactFormatError(path, exc.message) from exc
