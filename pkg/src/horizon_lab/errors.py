"""Exception hierarchy.

Each error carries an ``exit_code`` so the command line front end can map
failures onto its documented status values (1 config, 2 numeric, 3 I/O).
"""


class HorizonLabError(Exception):
    exit_code = 2


# configuration problems -> exit 1

class ConfigError(HorizonLabError):
    exit_code = 1


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ConfigError):
    pass


class UnknownCommand(ConfigError):
    pass


# numerical problems -> exit 2

class NumericError(HorizonLabError):
    exit_code = 2


class DomainError(NumericError, ValueError):
    pass


class NonIntegrable(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class StepFailure(NumericError):
    pass


class WindowTooShort(NumericError):
    pass


class RegimeBoundary(NumericError):
    pass


class ConstraintViolation(NumericError, ValueError):
    pass


class MissingSolution(NumericError, KeyError):
    pass


class QuadratureBudgetExceeded(NumericError):
    pass


class NotHermitian(NumericError):
    pass


class NotProjection(NumericError):
    pass
