"""Exception hierarchy shared by the library and the CLI."""

from typing import Optional


class MgmaskError(Exception):
    """Base class for all mgmask errors."""

    exit_code: int = 1


class FormatError(MgmaskError, ValueError):
    """A file could not be decoded."""

    exit_code = 2


class BadMagicError(FormatError):
    """File does not start with the expected magic value."""


class UnsupportedVersionError(FormatError):
    """File declares a format version this reader does not know."""


class SizeMismatchError(FormatError):
    """Header extents disagree with the payload length."""


class NonFiniteError(FormatError):
    """Payload contains NaN or infinity."""


class InvalidInputError(MgmaskError, ValueError):
    """A precondition on arguments or configuration was violated."""

    exit_code = 3


class ShapeMismatchError(InvalidInputError):
    """Array dimensions do not agree."""


class MissingFlowError(InvalidInputError):
    """A required flow field is not available."""

    def __init__(self, message: str, pair: Optional[tuple[int, int]] = None) -> None:
        super().__init__(message)
        self.pair = pair


class SceneError(InvalidInputError):
    """A synthetic scene cannot be generated as specified."""


class NumericError(MgmaskError, ArithmeticError):
    """A computation produced non-finite values."""

    exit_code = 4


class TrainingDivergedError(NumericError):
    """Training loss became non-finite."""

    def __init__(self, step: int, last_finite_step: Optional[int]) -> None:
        super().__init__(
            f"Loss became non-finite at step {step} "
            f"(last finite step: {last_finite_step})"
        )
        self.step = step
        self.last_finite_step = last_finite_step
