"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PushdbError(Exception):
    """Base class for all pushdb errors."""


class ParseError(PushdbError):
    """Syntax error in Datalog text, with 1-based line/column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ProgramError(PushdbError):
    """Structurally invalid program (classification, arity, query issues)."""


class PlanError(PushdbError):
    """Plan construction failed or plan/database mismatch."""


class StorageError(PushdbError):
    """Relation structure misuse (arity mismatch, bad id, domain violation)."""


class LoadError(PushdbError):
    """Fact file could not be loaded."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class CapacityError(PushdbError):
    """Requested generator output exceeds a structural bound."""
