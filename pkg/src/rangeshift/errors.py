"""Exception hierarchy shared across the simulator."""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(SimulationError):
    """A parameter bundle violates one of its invariants.

    Carries the name of the offending field in ``field``.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ResolutionError(SimulationError):
    """Grid spacing too coarse to resolve the corridor."""


class PointOutsideDomainError(SimulationError):
    """A sampling point falls outside the active domain."""


class NonPositiveSpeedError(SimulationError):
    """The analytic front speed is not positive (Allee threshold >= 1/2)."""


class InsufficientSamplesError(SimulationError):
    """Not enough trajectory samples for a regression estimate."""


class AbsentFrontError(SimulationError):
    """No front position available after the burn-in window."""


class IncompleteTrajectoryError(SimulationError):
    """Trajectory does not reach the classification horizon."""


class ConfigError(SimulationError):
    """Configuration text could not be parsed or validated.

    ``line`` is the 1-based line number when known, else None.
    """

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
