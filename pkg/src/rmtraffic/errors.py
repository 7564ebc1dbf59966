"""Exception hierarchy shared by every module in the package."""


class RmtError(Exception):
    """Base class for all package errors."""


class InputError(RmtError, ValueError):
    """Malformed or inconsistent input data."""


class MalformedRow(InputError):
    pass


class UnequalSpacing(InputError):
    pass


class DuplicateLabel(InputError):
    pass


class EmptyLog(InputError):
    pass


class AllExcluded(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidSpec(RmtError, ValueError):
    """A parameter set violates an operation's precondition."""


class IndexOutOfBounds(InvalidSpec):
    pass


class SpanOutOfBounds(InvalidSpec):
    pass


class WindowTooLong(InvalidSpec):
    pass


class IncompatibleReports(InvalidSpec):
    pass


class NumericalError(RmtError, ArithmeticError):
    """The data does not support the requested computation."""


class ZeroVariance(NumericalError):
    def __init__(self, label):
        super().__init__(f"series {label!r} has zero variance")
        self.label = label


class QOutOfRange(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class TooFewEigenvalues(NumericalError):
    pass


class WindowTooLarge(NumericalError):
    pass


class EmptySample(NumericalError):
    pass


class NotNormalized(NumericalError):
    pass


class NoDeviating(NumericalError):
    def __init__(self, message="no eigenvalue above the upper bound", window=None):
        if window is not None:
            message = f"{message} (window {window})"
        super().__init__(message)
        self.window = window
