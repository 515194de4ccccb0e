"""Exception hierarchy.

The CLI maps each family onto an exit code: ``InputError`` -> 1,
``ValidationError`` -> 2, ``RuleError`` -> 3.
"""

from __future__ import annotations


class CircuitAnnotatorError(Exception):
    exit_code = 1


class InputError(CircuitAnnotatorError):
    """Unreadable or syntactically broken input."""

    exit_code = 1


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if source:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:{column}:" if column is not None else f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class ValidationError(CircuitAnnotatorError):
    """Input parsed fine but violates a structural invariant."""

    exit_code = 2


class RuleError(CircuitAnnotatorError):
    exit_code = 3


class RuleSyntaxError(RuleError):
    def __init__(self, message: str, line: int, column: int, source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        prefix = f"{source}:" if source else ""
        super().__init__(f"{prefix}{line}:{column}: {message}")
