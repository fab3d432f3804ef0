"""Exception hierarchy for gpdgof."""


class GpdDomainError(ValueError):
    """Argument outside the support or parameter space of the distribution."""


class DegenerateSampleError(ValueError):
    """Sample carries too little information for the requested estimator."""


class SupportViolationError(ValueError):
    """Fitted parameters cannot host the observed data (theta + beta*x <= 0)."""


class InestimableTailError(ValueError):
    """An uncensored observation has zero estimated censoring survival."""


class QuadratureError(ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""


class SimulationIntegrityError(RuntimeError):
    """Too many Monte Carlo replications failed to produce a statistic."""


class DataError(ValueError):
    """Malformed or unusable input data."""
