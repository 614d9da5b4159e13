"""Exception types raised across the package."""


class NodalError(ValueError):
    """Base class for every domain error raised here."""


class EmptySpectrum(NodalError):
    pass


class InvalidRange(NodalError):
    pass


class CurveTooLarge(NodalError):
    pass


class InvalidCurve(NodalError):
    pass


class InvalidDirection(NodalError):
    pass


class ZeroCurvature(NodalError):
    pass


class InvalidMeasure(NodalError):
    pass


class DegenerateJet(NodalError):
    pass


class InvalidCorrelation(NodalError):
    pass


class ExpansionOutOfDomain(NodalError):
    pass


class ProbeDegenerate(NodalError):
    pass


class QuadratureMismatch(NodalError):
    """Two independent evaluations of the same integral disagree."""
