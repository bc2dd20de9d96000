"""Exception hierarchy shared by all modules."""


class InterlaceError(Exception):
    """Base class for errors raised by ctrlinterlace."""


class PoleEvaluationError(InterlaceError, ZeroDivisionError):
    """A transfer function was evaluated at (or numerically at) one of its poles."""


class ImproperTransferFunction(InterlaceError, ValueError):
    """Numerator degree exceeds denominator degree where a proper model is required."""


class IllConditionedDecomposition(InterlaceError, ValueError):
    """Partial-fraction split requested across pole groups that nearly coincide."""


class UnsupportedMultiplicity(InterlaceError, ValueError):
    """Repeated poles of multiplicity > 2 (or repeated complex pairs)."""


class ScheduleError(InterlaceError, ValueError):
    """An interlacing schedule is inconsistent with the block set."""


class IllPosedLoop(InterlaceError, ValueError):
    """The feedback interconnection has a singular algebraic loop."""


class SingularResponse(InterlaceError, ZeroDivisionError):
    """Frequency response requested at a pole on the unit circle."""


class DivergenceError(InterlaceError, RuntimeError):
    """A simulation exceeded the divergence guard.

    The partially filled run is kept on ``run`` and the offending fast
    instant on ``step``.
    """

    def __init__(self, message, run=None, step=None):
        super().__init__(message)
        self.run = run
        self.step = step
