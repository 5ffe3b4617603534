"""Exception hierarchy shared across the package."""


class GbsvmError(Exception):
    """Base class for all package errors."""


class DatasetError(GbsvmError, ValueError):
    pass


class DataFormatError(DatasetError):
    """A CSV cell could not be parsed."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class UnsupportedMulticlassError(DatasetError):
    pass


class InsufficientDataError(DatasetError):
    pass


class StratificationError(DatasetError):
    pass


class TerminalBallError(GbsvmError):
    """Raised when a ball cannot be split (all member points coincide)."""


class SolverError(GbsvmError):
    pass


class DegenerateSolutionError(SolverError):
    """The multipliers give a zero label-weighted center sum, so w is undefined."""

    def __init__(self, message, norm_A=None, B=None, alpha_sum=None):
        super().__init__(message)
        self.norm_A = norm_A
        self.B = B
        self.alpha_sum = alpha_sum


class UntrainedModelError(SolverError):
    pass
