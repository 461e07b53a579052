"""Custom exceptions for the Wong-Zakai toolkit."""


class WongZakaiError(Exception):
    """Base exception for the toolkit."""
    pass


class DimensionError(WongZakaiError):
    """Raised when coefficient lengths or projection sizes do not match."""
    pass


class ArgumentError(WongZakaiError):
    """Raised when a scalar argument is outside its admissible range."""
    pass


class TimeDomainError(WongZakaiError):
    """Raised when a time argument lies outside [0, T]."""
    pass


class ModeIndexError(WongZakaiError):
    """Raised when a noise mode index exceeds the available modes."""
    pass


class QuadratureError(WongZakaiError):
    """Raised when a quadrature rule cannot resolve the requested operator."""
    pass


class BlowUpError(WongZakaiError):
    """Raised when a trajectory produces non-finite coefficients."""

    def __init__(self, message: str, last_valid_time: float) -> None:
        super().__init__(message)
        self.last_valid_time = last_valid_time


class ConfigurationError(WongZakaiError):
    """Raised when an experiment configuration is invalid."""

    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(message)
        self.line = line


class QuotaBreachError(WongZakaiError):
    """Raised when too many Monte-Carlo paths blow up."""
    pass


class ReportWriteError(WongZakaiError):
    """Raised when a report, table or manifest cannot be written."""
    pass


class ExperimentError(WongZakaiError):
    """Raised when an experiment fails for a reason outside the numerical contract."""
    pass
