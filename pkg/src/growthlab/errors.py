"""Exception types raised across growthlab."""


class GrowthLabError(Exception):
    """Base class for all library errors."""


class PresentationError(GrowthLabError, ValueError):
    """A presentation or word could not be parsed or is malformed."""


class TrivialWord(GrowthLabError, ValueError):
    pass


class StrategyMismatch(GrowthLabError):
    """The presentation does not support the requested word-problem engine."""


class BudgetExceeded(GrowthLabError):
    def __init__(self, message, partial_radius=None):
        super().__init__(message)
        self.partial_radius = partial_radius


class Unexplored(GrowthLabError):
    pass


class InsufficientData(GrowthLabError, ValueError):
    pass


class DegenerateGrowth(GrowthLabError):
    pass


class WindowTooSmall(GrowthLabError):
    pass


class NotContracting(GrowthLabError):
    pass


class NotAdmissible(GrowthLabError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NoTripleFound(GrowthLabError):
    pass


class InjectivityFailed(GrowthLabError):
    def __init__(self, message, first=None, second=None):
        super().__init__(message)
        self.first = first
        self.second = second


class AxiomViolation(GrowthLabError):
    def __init__(self, message, axiom=None, witness=None):
        super().__init__(message)
        self.axiom = axiom
        self.witness = witness


class OrderInconsistent(GrowthLabError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MissedAxis(GrowthLabError):
    def __init__(self, message, axis=None):
        super().__init__(message)
        self.axis = axis


class NoDeepPoint(GrowthLabError):
    def __init__(self, message, geodesic=None):
        super().__init__(message)
        self.geodesic = geodesic


class CollisionFound(GrowthLabError):
    def __init__(self, message, pair=None, n=None):
        super().__init__(message)
        self.pair = pair
        self.n = n


class ConfigError(GrowthLabError, ValueError):
    """A run configuration is missing, malformed or out of range."""
