from app.core.exceptions.base import DomainError


class ConfigError(DomainError):
    default_message = "invalid configuration"
    default_error_code = "CONFIG_ERROR"
