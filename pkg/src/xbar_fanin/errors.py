"""Exception types raised by the toolkit."""


class XbarError(Exception):
    """Base class for all toolkit errors."""


class DomainError(XbarError, ValueError):
    """An argument lies outside the domain of the function."""


class OutOfRangeError(DomainError):
    """A resistance lies outside a device's [r_lrs, r_hrs] read range."""


class InfeasibleError(XbarError, ValueError):
    """The requested design point cannot be realised (e.g. leak exceeds input)."""


class NeverFiresError(InfeasibleError):
    """The neuron drive never reaches threshold."""


class MissingResistanceError(XbarError, ValueError):
    """A placeholder device was used without an explicit resistance."""


class NumericError(XbarError, ArithmeticError):
    """Non-finite values reached the integrator."""


class ConfigError(XbarError, ValueError):
    """Malformed or inconsistent configuration input."""


class ScheduleError(XbarError, ValueError):
    """Malformed or overlapping spike schedule."""
