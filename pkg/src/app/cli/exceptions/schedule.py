from app.core.exceptions.base import DomainError
from app.core.exceptions.schedule import ScheduleError, UnreachableStateError

EXIT_CODE_MAPPINGS: dict[type[DomainError], int] = {
    ScheduleError: 3,
    UnreachableStateError: 3,
}
