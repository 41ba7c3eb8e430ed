"""Exception hierarchy shared by all modules."""


class DeGrootFriedkinError(Exception):
    """Base class for every error raised by this package."""


class MatrixStructureError(DeGrootFriedkinError, ValueError):
    """Raw matrix is not square, contains NaN/negative entries, or is not a valid
    relative interaction matrix."""


class MatrixFormatError(DeGrootFriedkinError, ValueError):
    """A matrix file could not be parsed."""


class PreconditionError(DeGrootFriedkinError, ValueError):
    """An operation was called outside its domain."""


class SingularityError(PreconditionError):
    """A self-weight is (numerically) 1, where the closed-form map is singular."""


class EigenvectorError(DeGrootFriedkinError, ArithmeticError):
    """The dominant left eigenvector could not be computed to tolerance."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class GenerationError(DeGrootFriedkinError, RuntimeError):
    """Random matrix generation gave up after its retry budget."""


class ScheduleError(DeGrootFriedkinError, ValueError):
    """A schedule references unknown ids or an inconsistent catalog."""


class ConfigError(DeGrootFriedkinError, ValueError):
    """A scenario configuration file is invalid."""
