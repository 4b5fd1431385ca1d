"""Exception types raised across the package."""


class ChoreaError(Exception):
    """Base class for all package errors."""


class CollisionSingularity(ChoreaError):
    def __init__(self, message, node=None, pair=None):
        super().__init__(message)
        self.node = node
        self.pair = pair


class GridNotClosed(ChoreaError):
    pass


class GridNotDivisible(ChoreaError):
    pass


class BoundaryMismatch(ChoreaError):
    pass


class InfeasiblePattern(ChoreaError):
    pass


class PreconditionViolated(ChoreaError):
    pass


class OmegaEqualsK(ChoreaError):
    pass


class DegenerateLoop(ChoreaError):
    pass


class InsufficientSamples(ChoreaError):
    pass


class NotIsolated(ChoreaError):
    pass


class AmbiguousPairing(ChoreaError):
    pass


class ConfigError(ChoreaError):
    """Invalid run configuration (bad field value or inconsistent combination)."""
