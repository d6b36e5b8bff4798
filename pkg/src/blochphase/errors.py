"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: :class:`DomainError` -> 2,
:class:`NumericalError` -> 3, :class:`ValidityError` -> 4.
"""


class BlochError(Exception):
    """Base class for every error raised by the package."""


class DomainError(BlochError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NormalizationError(DomainError):
    pass


class ValidityError(BlochError, ValueError):
    """A parameter combination violates a physical validity bound."""


class RangeError(ValidityError):
    """The action variable left [-1, 1]."""


class NumericalError(BlochError, ArithmeticError):
    pass


class PoleError(NumericalError):
    """The angle rate diverges because the action reached a pole."""


class QuadratureError(NumericalError):
    pass
