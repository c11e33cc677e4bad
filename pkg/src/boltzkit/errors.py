"""Exception types shared across the toolkit."""


class BoltzkitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BoltzkitError):
    """Input lies outside the mathematical domain of a map."""


class RangeError(BoltzkitError):
    """Parameter outside its admissible numeric range."""


class ConfigError(BoltzkitError):
    """Invalid configuration (unknown keys, unsupported kinds, bad values)."""


class DegenerateInput(BoltzkitError):
    """Input is degenerate for the requested diagnostic (e.g. identical data)."""


class NoConvergence(BoltzkitError):
    """An iteration exceeded its sweep budget.

    Carries the last residual in ``residual`` so callers can decide whether
    to rescale the data or refine the mesh.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NestingViolation(BoltzkitError):
    """The monotone sandwich ordering failed beyond tolerance.

    ``where`` is a tuple ``(iteration, time_index, node_index)`` locating the
    worst offender, ``value`` the violation magnitude.
    """

    def __init__(self, message, where=None, value=None):
        super().__init__(message)
        self.where = where
        self.value = value
