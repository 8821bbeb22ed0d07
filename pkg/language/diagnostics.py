from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .models import SourceSpan


class Severity(str, Enum):
    ERROR = 'error'
    WARNING = 'warning'

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Diagnostic:
    """A parse or validation finding anchored at a source span."""
    severity: Severity
    code: str
    message: str
    span: SourceSpan

    def __post_init__(self):
        if not self.message:
            raise ValueError('diagnostic message is empty')

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def format(self, source_name: str = '<input>') -> str:
        return f'{source_name}:{self.span.line}:{self.span.column}: {self.severity} {self.code}: {self.message}'


class DiagnosticCollector:
    """Accumulates diagnostics in emission order."""

    def __init__(self):
        self._diagnostics: list[Diagnostic] = []

    def error(self, code: str, message: str, span: SourceSpan) -> None:
        self._diagnostics.append(Diagnostic(Severity.ERROR, code, message, span))

    def warning(self, code: str, message: str, span: SourceSpan) -> None:
        self._diagnostics.append(Diagnostic(Severity.WARNING, code, message, span))

    def report(self, code: str, message: str, span: SourceSpan, *, as_error: bool) -> None:
        if as_error:
            self.error(code, message, span)
        else:
            self.warning(code, message, span)

    def has_errors(self) -> bool:
        return any(d.is_error for d in self._diagnostics)

    @property
    def diagnostics(self) -> tuple[Diagnostic, ...]:
        return tuple(self._diagnostics)


def has_errors(diagnostics) -> bool:
    return any(d.is_error for d in diagnostics)
