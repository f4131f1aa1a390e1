"""
領域錯誤基類

子類別宣告 default_error_code；CLI 依 cli/exceptions 的 EXIT_CODE_MAPPINGS
決定退出碼，並把 error_code 與 message 寫成 stderr 的單行錯誤。
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar


@dataclass(frozen=True)
class DomainErrorDetail:
    """One offending input: the parameter (``field``) and what is wrong with it."""

    message: str
    field: str | None = None
    code: str | None = None

    def render(self) -> str:
        return f"{self.field}: {self.message}" if self.field else self.message


class DomainError(Exception):
    default_message: ClassVar[str] = "domain rule violated"
    default_error_code: ClassVar[str] = "DOMAIN_ERROR"

    def __init__(
        self,
        message: str | None = None,
        *,
        error_code: str | None = None,
        errors: list[DomainErrorDetail] | None = None,
    ) -> None:
        self.message = message or self.default_message
        self.error_code = error_code or self.default_error_code
        self.errors = errors or []
        super().__init__(self.message)

    @property
    def fields(self) -> list[str]:
        """Parameters named by the attached details, in order."""
        return [e.field for e in self.errors if e.field]
