from __future__ import annotations

from typing import Any

from app.core.exceptions.base import DomainError, DomainErrorDetail


class InvalidParameterError(DomainError):
    default_message = "invalid parameter"
    default_error_code = "INVALID_PARAMETER"

    def __init__(self, message: str | None = None, *, field: str | None = None) -> None:
        errors = None
        if field is not None:
            errors = [
                DomainErrorDetail(
                    message=message or self.default_message,
                    field=field,
                    code=self.default_error_code,
                )
            ]
        super().__init__(message=message, error_code=self.default_error_code, errors=errors)


class InvalidStateError(DomainError):
    """A token sequence carries MASK where the operation forbids it."""

    default_message = "sequence contains MASK tokens"
    default_error_code = "INVALID_STATE"


class ArtifactFormatError(DomainError):
    default_error_code = "ARTIFACT_FORMAT"

    def __init__(self, path: Any, reason: str) -> None:
        super().__init__(
            message=f"{path}: {reason}",
            error_code=self.default_error_code,
        )


class ArtifactIOError(DomainError):
    default_error_code = "IO_ERROR"

    def __init__(self, path: Any, reason: str) -> None:
        self.path = path
        super().__init__(
            message=f"{path}: {reason}",
            error_code=self.default_error_code,
        )
