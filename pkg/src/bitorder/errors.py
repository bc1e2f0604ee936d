"""Exception hierarchy.

``ConfigError`` maps to CLI exit code 2, ``DataError`` to exit code 3.
"""

from __future__ import annotations


class BitorderError(Exception):
    """Base class for all package errors."""


class ConfigError(BitorderError, ValueError):
    """Invalid hyperparameter or option combination."""


class DimensionError(BitorderError, ValueError):
    """Bit rows or matrices of different widths were combined."""


class DataError(BitorderError, ValueError):
    """Input data violates a structural requirement."""


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CycleError(DataError):
    """The is-a graph contains a directed cycle."""

    def __init__(self, member: str):
        self.member = member
        super().__init__(f"is-a relation contains a cycle through {member!r}")


class NotClosedError(DataError):
    """A pair set expected to be transitively closed is not."""


class UnknownConceptError(DataError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown concept {name!r}")

    def __str__(self) -> str:
        return self.args[0]


class FormatError(DataError):
    """Malformed embedding file or split directory."""
