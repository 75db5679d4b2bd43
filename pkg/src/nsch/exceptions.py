"""Exception hierarchy for the solver.

Everything raised on purpose derives from NschError so the CLI can map
failures onto its exit codes (config -> 1, numerics -> 2, I/O -> 3).
"""


class NschError(Exception):
    """Base class for all solver errors."""


class ConfigError(NschError):
    """Invalid configuration: bad value, unknown key, violated constraint."""


class DomainError(NschError):
    """A function was evaluated outside its mathematical domain."""


class SingularityError(NschError):
    """A singular potential was evaluated at or beyond the pure phases."""


class UnsupportedModeError(NschError):
    """Operation not available for the grid mode (e.g. velocity on the
    Neumann rectangle, raw gradients outside composite operators)."""


class PreconditionError(NschError):
    """An operation's precondition failed (e.g. dual Stokes norm of a
    field that is not solenoidal)."""


class DataError(NschError):
    """Initial or restart data violates a structural requirement."""


class IoError(NschError):
    """Reading or writing an output artifact failed."""


class CoercivityError(NschError):
    """No coercivity threshold could be certified within the search horizon."""


class DivergenceError(NschError):
    """The time integration produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class StabilityError(NschError):
    """Emergency step-halving was exhausted without meeting the residual
    trigger."""
