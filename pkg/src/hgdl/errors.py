"""Exception types shared across the library.

The CLI maps these onto exit codes: parameter problems exit with 2,
malformed or invalid input data with 3, numerical failures with 4.
"""


class ParameterError(ValueError):
    """A caller-supplied parameter is out of range or inconsistent."""


class InputError(ValueError):
    """Input data violates a precondition (non-finite values, bad labels)."""


class FormatError(InputError):
    """A data file does not conform to its declared layout."""


class NumericalError(ArithmeticError):
    """An iterative solver produced non-finite values or diverged."""


class InternalError(RuntimeError):
    """An internal invariant was violated; indicates a bug upstream."""
