"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class VortexError(Exception):
    """Base class for every error raised by this package."""


class DegenerateInputError(VortexError, ValueError):
    """Two vortices coincide (or come closer than the collision threshold)."""


class UnsupportedConfigurationError(VortexError, ValueError):
    """Configuration outside the supported class (e.g. zero total strength)."""


class ChartSingularityError(VortexError, ValueError):
    """A coordinate chart is evaluated at (or too near) one of its singular points."""


class OutOfDomainError(VortexError, ValueError):
    """Arguments violate a domain constraint (sign conventions, ranges)."""


class IntegrationError(VortexError, RuntimeError):
    """The ODE integrator could not continue.

    ``last_t`` and ``last_y`` hold the last accepted state.
    """

    def __init__(self, message: str, last_t: float | None = None, last_y=None):
        super().__init__(message)
        self.last_t = last_t
        self.last_y = last_y


class NotPeriodicError(VortexError, RuntimeError):
    """No return to the initial point was found within the time budget."""


class EquilibriumError(VortexError, RuntimeError):
    """The initial point is (numerically) a fixed point of the flow."""


class NotRelativelyPeriodicError(VortexError, RuntimeError):
    """Vortices do not return to a common rigid rotation of the initial configuration."""


class InconsistencyError(VortexError, RuntimeError):
    """Two computations that must agree do not."""
