"""Exception types shared across the toolkit.

Every error raised by a pipeline stage derives from ToolkitError so the
CLI can map failures onto its exit codes.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(ToolkitError, ValueError):
    """An argument violates an operation's precondition."""


class ConfigError(ToolkitError, ValueError):
    """A scenario configuration is malformed or inconsistent."""


class DegenerateMeasurementError(ToolkitError):
    """A measurement record cannot be normalized (some pair sum is zero)."""


class InvalidMatrixError(ToolkitError):
    """A sensing matrix is unusable for the requested solver (e.g. zero column)."""


class SolverDivergenceError(ToolkitError):
    """The iterative solver failed to converge.

    Carries the iteration index and the tail of the objective history.
    """

    def __init__(self, message, iteration=None, objective_tail=None):
        super().__init__(message)
        self.iteration = iteration
        self.objective_tail = tuple(objective_tail or ())


class DegeneratePartitionError(ToolkitError):
    """The contrast metric's threshold rule produced an empty signal set."""


class UndefinedCnrError(ToolkitError):
    """The background has zero spread, so the contrast-to-noise ratio is undefined."""
