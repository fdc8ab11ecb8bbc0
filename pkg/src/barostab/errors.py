"""Exception hierarchy shared by all modules."""


class BarostabError(Exception):
    """Base class for numerical failures raised by this package."""


class ConfigError(BarostabError, ValueError):
    """Invalid or inconsistent configuration."""


class DensityOutOfRange(BarostabError, ValueError):
    """Density outside the admissible interval of the equation of state."""


class QuadratureFailure(BarostabError):
    pass


class BlowDown(BarostabError):
    """Velocity collapsed to the positivity floor while integrating."""


class StepFailure(BarostabError):
    pass


class BracketFailure(BarostabError):
    """A root-finding bracket could not be established."""


class ToleranceFailure(BarostabError):
    pass


class NonFiniteState(BarostabError):
    """A time step produced NaN or infinite values."""


class WallClockBudget(BarostabError):
    pass


class InsufficientSamples(BarostabError, ValueError):
    pass
