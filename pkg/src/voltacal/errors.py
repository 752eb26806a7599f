"""Exception hierarchy.

``InputError`` subclasses mean the caller handed over bad data (CLI exit 2);
``NumericalError`` subclasses mean the data were well formed but the
computation is undefined or failed (CLI exit 3).
"""


class VoltacalError(Exception):
    pass


class InputError(VoltacalError):
    pass


class NumericalError(VoltacalError):
    pass


class EmptyFile(InputError):
    pass


class MalformedRow(InputError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class WindowNotCovered(InputError):
    pass


class NoInteriorMinimum(NumericalError):
    pass


class TooFewReplicates(InputError):
    pass


class TooFewPoints(InputError):
    pass


class NonpositiveConcentration(InputError):
    pass


class DegenerateDesign(NumericalError):
    pass


class SlopeTooFlat(NumericalError):
    pass


class ZeroDenominator(NumericalError, ZeroDivisionError):
    pass


class OutOfRange(NumericalError):
    """Inverted concentration outside the calibrated range.

    Carries the computed quantity so callers can still report it.
    """

    def __init__(self, message, quantity=None, bounds=None):
        super().__init__(message)
        self.quantity = quantity
        self.bounds = bounds


class UnbalancedDesign(InputError):
    pass


class SingleReplicate(InputError):
    pass


class NonIntegerMultiple(InputError):
    pass


class ZeroVariance(InputError):
    pass


class NonConvergence(NumericalError):
    pass


class UnknownTable(InputError):
    pass


class ChecksumMismatch(InputError):
    pass
