"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class InputError(ValueError):
    """A caller passed something outside an operation's domain."""


class SearchSpaceError(InputError):
    """An exhaustive search would exceed its configured size guard."""


class ScenarioSyntaxError(InputError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScenarioSemanticError(InputError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
