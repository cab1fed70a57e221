"""Exception types raised across dmtlab."""


class DMTError(Exception):
    """Base class for all dmtlab errors."""


class InvalidConfigError(DMTError, ValueError):
    """Antenna counts or run parameters are not acceptable."""


class DomainError(DMTError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionError(DMTError, ValueError):
    """Exponent vectors do not match the antenna configuration."""


class InfeasibleError(DMTError, ValueError):
    """A reduced point (a, b, y) violates the feasibility constraints."""


class UnsupportedCaseError(DMTError, ValueError):
    """A closed form is requested for a configuration it does not cover."""


class InsufficientStatisticsError(DMTError, RuntimeError):
    """Too few outage events to fit a diversity slope."""


class SolverError(DMTError, RuntimeError):
    """Internal optimizer failure (should not happen for valid input)."""
