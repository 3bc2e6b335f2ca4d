"""Exception hierarchy shared by the solver and the command line front end."""


class EfimovError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EfimovError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class SingularityError(DomainError):
    """Evaluation was requested exactly on a pole."""


class BracketError(EfimovError, ValueError):
    """A root bracket does not enclose a sign change."""


class EvaluationError(EfimovError, ArithmeticError):
    """A function returned NaN during root finding or integration."""


class ConvergenceError(EfimovError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(EfimovError, ValueError):
    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where = f"{key}: "
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(where + message)
        self.key = key
        self.line = line


class RunError(EfimovError, RuntimeError):
    """A sweep failed systematically (more than half of its rows)."""
