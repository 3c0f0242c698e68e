"""
Error hierarchy for the risk engine.

Every class carries the process exit code the management commands use when
the error escapes to the command line.
"""


class RiskEngineError(Exception):
    exit_code = 1


class ConfigError(RiskEngineError):
    exit_code = 2


class DomainError(RiskEngineError, ValueError):
    """An argument lies outside the domain of the operation."""
    exit_code = 2


class NotSPDError(DomainError):
    pass


class DimensionMismatchError(DomainError):
    pass


class SimplexError(DomainError):
    pass


class ConvergenceError(RiskEngineError):
    """The fixed-point solver stopped above tolerance. `report` holds the last iterate."""
    exit_code = 4

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DataError(RiskEngineError):
    exit_code = 3


class RowError(DataError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ParseError(RowError):
    pass


class NonPositivePriceError(RowError):
    pass


class DuplicateDateError(RowError):
    pass


class InsufficientDataError(DataError):
    pass


class MisalignedDataError(DataError):
    pass
