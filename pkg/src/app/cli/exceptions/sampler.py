from app.core.exceptions.base import DomainError
from app.core.exceptions.sampler import SamplingError

EXIT_CODE_MAPPINGS: dict[type[DomainError], int] = {
    SamplingError: 3,
}
