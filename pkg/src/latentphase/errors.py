"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: InputError/FormatError -> 2,
NumericalError/FitError -> 3.
"""


class LatentPhaseError(Exception):
    """Base class for all package errors."""


class InputError(LatentPhaseError, ValueError):
    """Invalid argument values, shapes, or preconditions."""


class DomainError(InputError):
    """Input outside the mathematical domain of an operation."""


class FormatError(LatentPhaseError, ValueError):
    """Malformed file contents (binary headers, CSV rows, config keys)."""


class NumericalError(LatentPhaseError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy contract."""


class FitError(NumericalError):
    """A fitting routine had insufficient or degenerate data."""
