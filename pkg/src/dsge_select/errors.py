"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`DsgeSelectError`
so callers (and the CLI) can separate model/solver failures from bugs.
"""


class DsgeSelectError(Exception):
    """Base class for all library errors."""


# model construction / IO
class DimensionMismatch(DsgeSelectError, ValueError):
    pass


class NonFiniteEntry(DsgeSelectError, ValueError):
    pass


class InvalidParams(DsgeSelectError, ValueError):
    pass


class ParseError(DsgeSelectError, ValueError):
    pass


class SchemaVersionMismatch(ParseError):
    pass


# QZ
class SingularPencil(DsgeSelectError):
    """det(A0 - lambda A1) vanishes identically."""


class NoConvergence(DsgeSelectError):
    pass


class DegeneratePair(DsgeSelectError, ValueError):
    pass


class SwapIllConditioned(DsgeSelectError):
    pass


# selection
class UnitRootDetected(DsgeSelectError):
    """A generalized eigenvalue lies on the unit circle."""


class RankConditionFailed(DsgeSelectError):
    """Z11 is singular or too ill-conditioned."""


class MissingVariableRole(DsgeSelectError, KeyError):
    pass


# simulation / verification
class IndexOutOfRange(DsgeSelectError, IndexError):
    pass


class ShapeMismatch(DsgeSelectError, ValueError):
    pass


class NotStationary(DsgeSelectError):
    pass


class NoOverlap(DsgeSelectError, ValueError):
    pass


# occbin
class TerminalNotSlack(DsgeSelectError):
    pass


class SingularRecursionStep(DsgeSelectError):
    pass


class CycleDetected(DsgeSelectError):
    def __init__(self, msg, period=None, history=()):
        super().__init__(msg)
        self.period = period
        self.history = tuple(history)


class MaxIterations(DsgeSelectError):
    def __init__(self, msg, history=()):
        super().__init__(msg)
        self.history = tuple(history)


class ReferenceNotDeterminate(DsgeSelectError):
    """The slack regime has no unique stable solution to anchor the terminal condition."""
