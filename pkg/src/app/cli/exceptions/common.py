from app.core.exceptions.base import DomainError
from app.core.exceptions.common import (
    ArtifactFormatError,
    ArtifactIOError,
    InvalidParameterError,
    InvalidStateError,
)

EXIT_CODE_MAPPINGS: dict[type[DomainError], int] = {
    ArtifactIOError: 2,
    ArtifactFormatError: 2,
    InvalidParameterError: 3,
    InvalidStateError: 3,
}
