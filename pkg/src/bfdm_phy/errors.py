"""Exception hierarchy shared by all modules."""


class BfdmError(Exception):
    """Base class for all package errors."""


class PreconditionError(BfdmError, ValueError):
    """An input violates a documented precondition."""


class DimensionError(PreconditionError):
    """Array lengths or sampling grids are incompatible."""


class DomainError(PreconditionError):
    """A scalar argument lies outside the domain where a formula is valid."""


class NormalizationError(PreconditionError):
    """A pulse or scattering function does not satisfy its normalization."""


class LayoutError(PreconditionError):
    """A frame layout is inconsistent."""


class FramingError(PreconditionError):
    """A received signal does not match the expected frame structure."""


class ParameterError(PreconditionError):
    """A physical parameter is out of range."""


class ConfigError(PreconditionError):
    """A scenario configuration failed validation.

    Attributes
    ----------
    fields : list of str
        Names of the offending configuration fields.
    """

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = list(fields)


class NumericalError(BfdmError, ArithmeticError):
    """An iterative or numerical routine failed."""


class IllConditionedError(NumericalError):
    """A linear system is too ill-conditioned to solve reliably.

    Attributes
    ----------
    condition : float
        Estimated condition number (ratio of upper to lower bound).
    """

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition
