"""Exception types shared across the package."""


class ShareSenseError(Exception):
    """Base class for all errors raised by this package."""


class InfeasibleProblem(ShareSenseError):
    """The constraint set is empty (phase-1 optimum stayed positive)."""


class UnboundedProblem(ShareSenseError):
    """A cost-improving ray exists; some budget direction is unconstrained."""


class SingularBasis(ShareSenseError):
    """A basis matrix that should be invertible is numerically singular."""


class RankDeficient(ShareSenseError):
    """The budget rows are linearly dependent; the basis-partition theory
    downstream assumes full row rank."""


class BracketFailure(ShareSenseError):
    """No sign change found when searching for a polynomial root; the
    (m, beta) pair is outside the sane range."""


class DegenerateBase(ShareSenseError):
    """The base solution carries degeneracy/non-uniqueness flags, so the
    arrival certificate would be unreliable."""
