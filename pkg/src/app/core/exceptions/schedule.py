from app.core.exceptions.base import DomainError


class ScheduleError(DomainError):
    default_error_code = "INFEASIBLE_SCHEDULE"

    def __init__(self, t: int, residual: float) -> None:
        self.t = t
        self.residual = residual
        super().__init__(
            message=f"negative residual mass {residual:.3e} at t={t}",
            error_code=self.default_error_code,
        )


class UnreachableStateError(DomainError):
    default_error_code = "UNREACHABLE_STATE"

    def __init__(self, t: int, *, z_t: int, z0: int, position: int | None = None) -> None:
        self.t = t
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(
            message=f"state {z_t} is unreachable from {z0} at t={t}{where}",
            error_code=self.default_error_code,
        )
