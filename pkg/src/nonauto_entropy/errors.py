"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the CLI can report
rejected inputs without parsing messages.
"""

from __future__ import annotations


class EntropyError(Exception):
    code = "Error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        out.update(self.details)
        return out


class InputError(EntropyError):
    """Malformed or inadmissible input data."""

    code = "InputError"


class NotSquare(InputError):
    code = "NotSquare"


class EntryNotBit(InputError):
    code = "EntryNotBit"


class ZeroRow(InputError):
    code = "ZeroRow"


class ZeroColumn(InputError):
    code = "ZeroColumn"


class NotATransitionMatrix(InputError):
    code = "NotATransitionMatrix"


class CountTooLarge(InputError):
    code = "CountTooLarge"


class OutOfDomain(InputError):
    code = "OutOfDomain"


class SizeMismatch(InputError):
    code = "SizeMismatch"


class InvalidCover(InputError):
    code = "InvalidCover"


class InvalidSequence(InputError):
    code = "InvalidSequence"


class InvalidConfig(InputError):
    code = "InvalidConfig"


class HypothesisFailure(EntropyError):
    """A hypothesis required for a bound does not hold for the given data."""

    code = "HypothesisFailure"


class EmptyLevel(HypothesisFailure):
    code = "EmptyLevel"


class NumericalError(EntropyError):
    code = "NumericalError"


class NoConvergence(NumericalError):
    code = "NoConvergence"


class NoContraction(NumericalError):
    code = "NoContraction"
