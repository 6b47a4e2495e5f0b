"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GroupingError(Exception):
    """Base class for every error raised by cellgroup."""


class InstanceError(GroupingError, ValueError):
    """The instance data violates a structural rule."""


class EmptyRouteError(InstanceError):
    pass


class DuplicateRouteError(InstanceError):
    pass


class TooFewPartsError(InstanceError):
    pass


class DimensionMismatchError(InstanceError):
    pass


class InstanceSyntaxError(InstanceError):
    """Malformed instance file. ``line`` is 1-based."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SamePartPairError(GroupingError, ValueError):
    """Two routes of the same part were compared; their dissimilarity is undefined."""


class FamilyTooSmallError(GroupingError, ValueError):
    pass


class MalformedFlowError(GroupingError):
    """A flow could not be decomposed into cycles.

    Users cannot build flows by hand through the public pipeline, so this
    signals a broken internal invariant rather than bad input.
    """


class SolverTimeout(GroupingError, TimeoutError):
    """The node-expansion budget ran out before optimality was proven.

    ``incumbent`` is the best solution found so far (may be ``None``) and
    ``bound`` a valid bound on the optimal objective.
    """

    def __init__(self, message: str, incumbent=None, bound=None):
        super().__init__(message)
        self.incumbent = incumbent
        self.bound = bound


class InstanceTooLargeError(GroupingError):
    pass


class InfeasibleConfigError(GroupingError, ValueError):
    pass


class InconsistentSolutionsError(GroupingError, ValueError):
    pass
