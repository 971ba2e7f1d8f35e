"""Exception types shared across the package."""


class ChristoffelError(Exception):
    """Base class for all package errors."""


class XOnBoundary(ChristoffelError):
    """The point is on (or outside) the boundary where an interior point is required."""


class DegreeTooLarge(ChristoffelError):
    pass


class MCVarianceTooHigh(ChristoffelError):
    pass


class NotPositiveDefinite(ChristoffelError):
    pass


class InvalidNormal(ChristoffelError):
    pass


class DegenerateAngle(ChristoffelError):
    pass


class ContainmentFailed(ChristoffelError):
    pass


class SectionDegenerate(ChristoffelError):
    pass


class SigmaViolated(ChristoffelError):
    pass


class ParameterOutOfRange(ChristoffelError):
    pass


class RoundTripFailed(ChristoffelError):
    pass


class UnknownExperiment(ChristoffelError):
    pass


class ParamOutOfRange(ChristoffelError):
    pass


class ConditionTooHigh(UserWarning):
    """Emitted (as a warning) when a Gram factor is badly conditioned."""
