"""Exception hierarchy shared by all solver modules."""

from __future__ import annotations


class MorphogrowError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(MorphogrowError, ValueError):
    pass


class IncompatibleGrids(MorphogrowError, ValueError):
    pass


class InvalidStretch(InvalidArgument):
    pass


class InvalidGrowthField(InvalidArgument):
    pass


class InvalidConfiguration(InvalidArgument):
    pass


class IncompatibleState(MorphogrowError, ValueError):
    pass


class StressOutOfModelRange(MorphogrowError, ValueError):
    pass


class NoConvergence(MorphogrowError, RuntimeError):
    pass


class NoEquilibrium(MorphogrowError, RuntimeError):
    pass


class SolverFailure(MorphogrowError, RuntimeError):
    pass


class TimeStampedError(MorphogrowError):
    """A solver error re-raised during time integration, tagged with ``t``."""

    def __init__(self, message: str, t: float, cause: Exception | None = None):
        super().__init__(f"t={t:.17g}: {message}")
        self.t = t
        self.cause = cause


class PositivityLoss(TimeStampedError):
    pass


class EnvelopeViolation(MorphogrowError):
    """Raised when a growth state leaves the exponential sub/supersolution band.

    Attributes
    ----------
    t : float
        Time of the offending state.
    cells : list of int
        Cell indices outside the band.
    X : list of float
        Cell midpoints of those cells.
    values : list of float
        Offending growth values.
    bounds : tuple of float
        ``(lower, upper)`` envelope values at ``t``.
    """

    def __init__(self, t, cells, X, values, bounds, trajectory=None):
        self.t = t
        self.cells = [int(c) for c in cells]
        self.X = [float(x) for x in X]
        self.values = [float(v) for v in values]
        self.bounds = bounds
        self.trajectory = trajectory
        super().__init__(
            f"envelope violated at t={t:.17g} in cells {self.cells} "
            f"(G={self.values}, band=({bounds[0]:.17g}, {bounds[1]:.17g}))"
        )
