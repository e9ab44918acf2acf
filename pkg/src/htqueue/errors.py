"""Exception hierarchy.

Every error raised by the library derives from :class:`HTQueueError`, so a
caller can isolate one failing table cell without swallowing unrelated bugs.
"""


class HTQueueError(Exception):
    """Base class for all library errors."""


class ConfigError(HTQueueError, ValueError):
    """Malformed or inconsistent configuration document."""


# distributions
class NonUnitMean(ConfigError):
    pass


class NonPositiveParameter(ConfigError):
    pass


class DegenerateLattice(ConfigError):
    pass


class TwoPointOrderViolation(ConfigError):
    pass


class OutsideAnalyticityStrip(HTQueueError, ValueError):
    """A transform was requested outside the strip where it is finite."""


class UnsupportedOrder(HTQueueError, ValueError):
    pass


# transforms and saddle points
class LogBranchFailure(HTQueueError, ArithmeticError):
    pass


class NewtonDivergence(HTQueueError, ArithmeticError):
    pass


class NonNegativeSaddle(HTQueueError, ArithmeticError):
    pass


# quadrature
class TruncationFailure(HTQueueError, ArithmeticError):
    pass


class PanelLimitExceeded(HTQueueError, ArithmeticError):
    pass


# Gaussian random walk and approximations
class BetaOutOfRange(HTQueueError, ValueError):
    pass


class RefinementDegenerate(HTQueueError, ArithmeticError):
    pass


# transform inversion
class InversionUnstable(HTQueueError, ArithmeticError):
    pass


# simulation
class UnstableLoad(ConfigError):
    pass
