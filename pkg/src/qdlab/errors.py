"""Exception types raised by qdlab."""


class QDLabError(Exception):
    """Base class for all qdlab errors."""


class NotPhysical(QDLabError, ValueError):
    """A matrix fails the density-matrix checks (Hermitian, unit trace, PSD)."""


class NotHermitian(QDLabError, ValueError):
    pass


class DomainError(QDLabError, ValueError):
    """A parameter lies outside its allowed range."""


class OptimizerFailure(QDLabError, RuntimeError):
    pass


class GridTooCoarse(QDLabError, ValueError):
    pass
