"""Exception hierarchy.

Every error raised on bad input derives from :class:`DataError` so callers
(the CLI in particular) can map the whole family to one exit status.
"""


class EnergycastError(Exception):
    """Base class for all package errors."""


class DataError(EnergycastError, ValueError):
    """Input data violates a documented precondition."""


# ingest
class EmptyFile(DataError):
    pass


class MalformedTimestamp(DataError):
    def __init__(self, line, text=""):
        super().__init__(f"line {line}: malformed timestamp {text!r}")
        self.line = line


class NonNumericValue(DataError):
    def __init__(self, line, text=""):
        super().__init__(f"line {line}: non-numeric value {text!r}")
        self.line = line


class NonMonotonicTimestamps(DataError):
    def __init__(self, index):
        super().__init__(f"timestamp at index {index} does not increase")
        self.index = index


class NegativeValue(DataError):
    def __init__(self, index, channel):
        super().__init__(f"negative {channel} value at index {index}")
        self.index = index
        self.channel = channel


class CalendarNotBinary(DataError):
    def __init__(self, index):
        super().__init__(f"calendar value at index {index} is not 0 or 1")
        self.index = index


# align
class IncompatibleInterval(DataError):
    def __init__(self, native, target):
        super().__init__(f"cannot resample native interval {native}s to {target}s")
        self.native = native
        self.target = target


class InsufficientKnownPoints(DataError):
    pass


class MissingChannel(DataError):
    def __init__(self, kind):
        super().__init__(f"missing channel {kind}")
        self.kind = kind


class EmptyIntersection(DataError):
    pass


# features
class EmptyInput(DataError):
    pass


class TooFewRows(DataError):
    pass


class InsufficientHistory(DataError):
    pass


class WindowTooLong(DataError):
    pass


class ZeroVarianceTarget(DataError):
    pass


class ZeroVariance(DataError):
    def __init__(self, feature):
        super().__init__(f"feature {feature!r} has zero variance")
        self.feature = feature


# models
class DimensionMismatch(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class StaleCache(EnergycastError):
    """Parameters changed between the forward pass and the backward pass."""


class EmptyDataset(DataError):
    pass


class DivergedTraining(EnergycastError, ArithmeticError):
    """Training produced a non-finite loss."""


class FormatError(DataError):
    pass


class UnsupportedVersion(FormatError):
    pass


# tune
class EmptySpace(DataError):
    pass


class EmptyGrid(DataError):
    pass


# eval
class LengthMismatch(DataError):
    pass


class SpanExceedsData(DataError):
    def __init__(self, span, available):
        super().__init__(f"span {span} needs more rows than the {available} available")
        self.span = span


class LengthExceedsData(DataError):
    def __init__(self, length, available):
        super().__init__(f"training length {length} needs more rows than the {available} available")
        self.length = length


class KTooLarge(DataError):
    pass


# datagen
class InvalidProfile(DataError):
    pass
