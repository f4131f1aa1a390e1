from app.core.exceptions.base import DomainError


class TrainingDivergedError(DomainError):
    default_error_code = "TRAINING_DIVERGED"

    def __init__(self, epoch: int) -> None:
        self.epoch = epoch
        super().__init__(
            message=f"loss became non-finite at epoch {epoch}",
            error_code=self.default_error_code,
        )
