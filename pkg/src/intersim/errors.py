"""Exception types shared across the package."""


class IntersimError(Exception):
    """Base class for all package errors."""


class GeometryError(IntersimError):
    """Cabin or world geometry is degenerate (e.g. eye below the window sill)."""


class ModelError(IntersimError):
    """Visual-field model parameters are inconsistent."""


class PredictionError(IntersimError):
    """Arrival prediction requested for a vehicle already past its conflict exit."""


class EfficiencyError(IntersimError):
    """Negative remaining time handed to the efficiency utility."""


class CalibrationError(IntersimError):
    """Weight calibration could not evaluate any candidate."""


class ConfigError(IntersimError):
    """Scenario configuration is missing, unreadable, or inconsistent."""


class MetricError(IntersimError):
    """A metric was requested for an episode that lacks the required event."""
