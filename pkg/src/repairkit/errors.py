"""Exception types shared across the package."""

from __future__ import annotations


class RepairKitError(Exception):
    """Base class for all errors raised by repairkit."""


class SchemaError(RepairKitError):
    """Arity mismatch, out-of-range position, or other schema violation."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line


class NotPrimaryKeyError(SchemaError):
    """A key set declares more than one key for some relation."""


class UnsafeVariableError(SchemaError):
    """A variable in an (in)equality atom does not occur in a relational atom."""


class ParseError(RepairKitError):
    def __init__(self, file: str, line: int, column: int, message: str):
        super().__init__(f"{file}:{line}:{column}: {message}")
        self.file = file
        self.line = line
        self.column = column
        self.message = message


class SizeGuardError(RepairKitError):
    """Input exceeds a brute-force or bag-size limit."""


class PreconditionError(RepairKitError, ValueError):
    pass


class InvalidDecompositionError(RepairKitError):
    pass
