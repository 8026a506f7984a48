# Error kinds raised by the computation and configuration layers.
# Everything except NumericalError is a ValueError so callers may catch broadly.


class InvalidArgumentError(ValueError):
    """Bad argument or mismatched dimension/size."""


class DomainError(ValueError):
    """Series argument outside the convergence radius, or an evaluator pole."""

    def __init__(self, message, spectral_radius=None):
        super().__init__(message)
        self.spectral_radius = spectral_radius


class ProfileError(ValueError):
    """SKR profile data violates its invariants (for example Q <= 0)."""


class SingularInputError(ValueError):
    """Input at a point where a closed formula divides by zero."""


class ConfigError(ValueError):
    """Run configuration missing, unreadable or invalid."""


class NumericalError(RuntimeError):
    """Numerical procedure failed to converge or outputs could not be produced."""
