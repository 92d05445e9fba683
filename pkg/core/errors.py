"""
Error hierarchy shared by every gfix app.

Each class carries the process exit code the CLI reports for it:
2 for usage problems, 3 for malformed files, 4 for numerical failures.
"""
from __future__ import annotations

EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_NUMERICAL = 4


class GfixError(Exception):
    exit_code = 1


# -------- usage

class UsageError(GfixError, ValueError):
    exit_code = EXIT_USAGE


class ShapeMismatchError(UsageError):
    pass


class RankMismatchError(UsageError):
    pass


class UnknownSymbolError(UsageError):
    """A symbol is absent from the PMF and no escape (smoothed alphabet) covers it."""


class DuplicateNameError(UsageError):
    pass


class OutputPathError(UsageError):
    """An output file or its directory cannot be created or replaced."""


# -------- file formats

class FormatError(GfixError):
    exit_code = EXIT_FORMAT


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class ShapePayloadMismatchError(FormatError):
    pass


class HeaderCorruptError(FormatError):
    pass


class PmfPayloadMismatchError(FormatError):
    pass


class SymbolCountMismatchError(FormatError):
    pass


# -------- numerics

class NumericalError(GfixError):
    exit_code = EXIT_NUMERICAL


class NonFiniteError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    def __init__(self, message: str, *, index: int):
        super().__init__(message)
        self.index = index
