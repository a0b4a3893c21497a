"""Exception hierarchy shared by all modules."""


class LOCCError(ValueError):
    """Base class for every error raised by this package."""


class SVDConvergenceError(LOCCError):
    pass


class PreconditionError(LOCCError):
    """An operation was called on inputs outside its domain."""


class NotDoublyStochastic(PreconditionError):
    pass


class NotAContraction(LOCCError):
    """The constructed operator has operator norm above 1 (beyond tolerance)."""


class RankViolation(PreconditionError):
    """Schmidt rank of the source is smaller than that of the target."""


class InfeasibleTarget(PreconditionError):
    """Requested success probability exceeds the maximal one."""


class ShapeMismatch(LOCCError):
    pass
