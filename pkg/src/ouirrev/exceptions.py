"""Exception types shared across the package."""


class ModelValidationError(ValueError):
    """Model definition violates an invariant (singular noise matrix, bad shapes)."""


class NotPositiveDefiniteError(ValueError):
    """Cholesky pivot fell at or below the positive-definiteness floor."""


class DegenerateModelError(ValueError):
    """Lyapunov system is singular (an eigenvalue pair of B sums to ~0)."""


class NoStationaryLawError(ValueError):
    """Requested a stationary law for a sweeping model, which has none."""


class PotentialUndefinedError(ValueError):
    """Free energy requested for a model whose force has no potential."""


class UndefinedEntropyError(ValueError):
    """Differential entropy requested for a singular (point-mass) state."""


class InsufficientDataError(ValueError):
    """Trajectory batch does not carry enough samples for the estimator."""


class NumericalFailureError(RuntimeError):
    """An iterative kernel failed to converge or overflowed."""
