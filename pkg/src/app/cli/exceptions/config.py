from app.core.exceptions.base import DomainError
from app.core.exceptions.config import ConfigError

EXIT_CODE_MAPPINGS: dict[type[DomainError], int] = {
    ConfigError: 1,
}
