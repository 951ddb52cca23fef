"""Exception hierarchy shared by all modules."""


class MDLTError(Exception):
    """Base class for every error raised by the toolkit."""


class ConfigurationError(MDLTError, ValueError):
    """Invalid parameters, malformed problem definitions, bad schema."""


class DomainError(MDLTError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SeriesConvergenceError(MDLTError, ArithmeticError):
    """A power series could not be summed to the requested accuracy."""


class DivergenceError(MDLTError, ArithmeticError):
    """The declared growth envelope implies the requested integral diverges."""


class QuadratureError(MDLTError, ArithmeticError):
    """Panel refinement hit its cap before meeting the requested tolerance."""


class DecayViolationError(MDLTError, ArithmeticError):
    """A transform exceeds its declared polynomial-decay majorant."""


class SingularSystemError(MDLTError, ArithmeticError):
    """A resolvent matrix is singular or too ill-conditioned to invert."""

    def __init__(self, message, point=None, condition=None):
        super().__init__(message)
        self.point = point
        self.condition = condition


class OverflowGuardError(MDLTError, OverflowError):
    """A scaling factor left the representable floating point range."""
