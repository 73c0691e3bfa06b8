"""Exception hierarchy shared by every module of the package."""


class LeadLagError(ValueError):
    """Base class for all validation errors raised by leadlag."""


class TooShort(LeadLagError):
    pass


class NonPositiveValue(LeadLagError):
    def __init__(self, index, value=None):
        self.index = index
        msg = f"non-positive value at index {index}"
        if value is not None:
            msg += f" ({value!r})"
        super().__init__(msg)


class DegenerateSeries(LeadLagError):
    pass


class MissingValue(LeadLagError):
    pass


class LengthMismatch(LeadLagError):
    pass


class OutOfRange(LeadLagError):
    pass


class ParityViolation(LeadLagError):
    pass


class InvalidTemperature(LeadLagError):
    pass


class UnreachableEnd(LeadLagError):
    pass


class OffsetTooLarge(LeadLagError):
    pass


class InvalidCoefficient(LeadLagError):
    pass


class LagOutOfRange(LeadLagError):
    pass


class EmptySample(LeadLagError):
    pass


class InsufficientOverlap(LeadLagError):
    pass


class GridMismatch(LeadLagError):
    pass
