"""Exception hierarchy shared by all sectorwave modules."""


class SectorwaveError(Exception):
    """Base class for every error raised by this package."""


# symbols
class SectorViolation(SectorwaveError, ValueError):
    pass


class SingularPoint(SectorwaveError, ValueError):
    pass


class InvalidDomain(SectorwaveError, ValueError):
    pass


class ExtensionUnavailable(SectorwaveError):
    pass


class SymbolConfigError(SectorwaveError, ValueError):
    pass


# spectral
class NotElliptic(SectorwaveError):
    pass


class TruncationError(SectorwaveError):
    pass


class GridMismatch(SectorwaveError, ValueError):
    pass


# solver
class InvalidSpeed(SectorwaveError, ValueError):
    pass


class NotHomogeneous(SectorwaveError):
    pass


class NearCriticalAngle(SectorwaveError, ValueError):
    pass


class SolveFailure(SectorwaveError):
    """A solve that stopped without converging; ``report`` holds the best state reached."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Diverged(SolveFailure):
    pass


class ZeroCollapse(SolveFailure):
    pass


# analyticity
class BelowNoiseFloor(SectorwaveError):
    pass


class NonDecaying(SectorwaveError):
    pass


class InsufficientDynamicRange(SectorwaveError):
    pass


class Inconclusive(SectorwaveError):
    def __init__(self, message, annotation=None, estimate=None):
        super().__init__(message)
        self.annotation = annotation
        self.estimate = estimate


class IllConditioned(SectorwaveError):
    pass


# closed forms
class CriticalAngle(SectorwaveError, ValueError):
    pass


class UnknownCase(SectorwaveError, KeyError):
    pass
