"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`RenormError`;
the CLI maps those to exit code 2 and anything else to exit code 1.
"""


class RenormError(Exception):
    """Base class for domain errors (bad parameter, undecidable case, ...)."""


class OverflowEscape(RenormError):
    """An orbit left the trapping region; ``orbit`` holds the truncated orbit."""

    def __init__(self, msg, orbit=None):
        super().__init__(msg)
        self.orbit = orbit or []


class Inconclusive(RenormError):
    pass


class NoRealFixedPoint(RenormError):
    pass


class IncomparablePrefix(RenormError):
    pass


class NoRootInBracket(RenormError):
    pass


class MultipleRoots(RenormError):
    pass


class AlphaNotRepelling(RenormError):
    pass


class ReturnBudgetExceeded(RenormError):
    pass


class DegenerateCenter(RenormError):
    pass


class DomainEscape(RenormError):
    def __init__(self, msg, column=None):
        super().__init__(msg)
        self.column = column


class TailBlowup(RenormError):
    pass


class KneadingTooShort(RenormError):
    pass


class NotUnimodal(RenormError):
    pass


class NewtonDiverged(RenormError):
    pass


class EigSolverFailure(RenormError):
    pass


class EigenvectorUncertified(RenormError):
    pass


class StraighteningFailed(RenormError):
    pass


class NotRenormalizable(RenormError):
    pass


class BisectionStalled(RenormError):
    pass


class GridTooCoarse(RenormError):
    pass
