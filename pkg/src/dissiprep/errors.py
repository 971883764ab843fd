"""Exception types raised across the package."""

from __future__ import annotations


class DissiprepError(Exception):
    """Base class for all package errors."""


class NotHermitian(DissiprepError, ValueError):
    pass


class NotPSD(DissiprepError, ValueError):
    pass


class NumericalFailure(DissiprepError, ArithmeticError):
    pass


class DimTooLarge(DissiprepError, ValueError):
    pass


class DimMismatch(DissiprepError, ValueError):
    pass


class DegenerateGap(DissiprepError, ValueError):
    pass


class WindowInverted(DissiprepError, ValueError):
    pass


class InvalidConfig(DissiprepError, ValueError):
    """Raised for malformed experiment configurations.

    ``field`` names the offending entry (dotted path) when known, and
    ``line`` the line number in the source file for JSON syntax errors.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class EvenFoldFactor(DissiprepError, ValueError):
    pass


class NonUnitaryElement(DissiprepError, ValueError):
    pass


class WrongFoldFactors(DissiprepError, ValueError):
    pass


class DegenerateData(DissiprepError, ValueError):
    pass
