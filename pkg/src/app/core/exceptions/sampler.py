from app.core.exceptions.base import DomainError


class SamplingError(DomainError):
    default_error_code = "RESIDUAL_MASK"

    def __init__(self, count: int) -> None:
        self.count = count
        super().__init__(
            message=f"{count} MASK tokens left after the final reverse step",
            error_code=self.default_error_code,
        )
