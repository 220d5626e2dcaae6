"""Exception types shared across the package."""


class ForcedOscError(Exception):
    """Base class for package errors."""


class DomainError(ForcedOscError, ValueError):
    """Argument outside the domain where the operation is defined."""


class ConstructionError(ForcedOscError, RuntimeError):
    """A precomputed object failed its own self-consistency checks."""


class ValidationError(ForcedOscError, ValueError):
    """Malformed forcing or run configuration."""


class SmoothnessPolicyError(ForcedOscError):
    """A computation needs more t-derivatives of a coefficient than it is granted."""


class ChartSingularityError(ForcedOscError):
    """Trajectory came too close to the origin for the action-angle chart."""


class IntegrationError(ForcedOscError, RuntimeError):
    """Adaptive integrator could not complete the requested span."""


class ShapeError(ForcedOscError, ValueError):
    """A normal-form series does not have the expected structure."""


class TruncationWarning(UserWarning):
    """A truncated Fourier series did not reach the requested tolerance."""
