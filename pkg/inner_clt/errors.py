# errors.py


class InnerCLTError(Exception):
    """Base class for every error raised by the package."""


class DomainError(InnerCLTError, ValueError):
    """Mathematical input outside the domain of an operation."""


class PreconditionError(InnerCLTError, ValueError):
    """Ordering, separation or grid-size precondition of a check is violated."""


class InsufficientScaleError(PreconditionError):
    def __init__(self, message, minimal_n=None):
        super().__init__(message)
        self.minimal_n = minimal_n


class NumericalFailureError(InnerCLTError, ArithmeticError):
    """A numerical routine could not reach the accuracy its contract promises."""


class ConfigError(InnerCLTError, ValueError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path:
            where += f" at '{path}'"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{message}{where}")
        self.path = path
        self.line = line
