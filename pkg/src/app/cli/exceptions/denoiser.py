from app.core.exceptions.base import DomainError
from app.core.exceptions.denoiser import TrainingDivergedError

EXIT_CODE_MAPPINGS: dict[type[DomainError], int] = {
    TrainingDivergedError: 3,
}
