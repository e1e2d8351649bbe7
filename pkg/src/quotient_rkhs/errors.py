"""Exception hierarchy shared by all modules."""


class RKHSError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(RKHSError, ValueError):
    """Dimension or shape mismatch."""


class DomainError(RKHSError, ValueError):
    """Input lies outside the domain where an operation is defined."""


class NumericalError(RKHSError, ArithmeticError):
    """An iterative routine failed to converge."""


class BranchError(RKHSError, ArithmeticError):
    """A fractional power would cross the principal branch cut."""


class SingularError(RKHSError, ArithmeticError):
    """A kernel denominator vanishes (pole)."""


class NearSingularError(RKHSError, ArithmeticError):
    """|J_phi| is too small for the quotient route."""


class ConvergenceError(RKHSError, ArithmeticError):
    """A truncated series is evaluated outside its convergence guard."""


class SamplerExhausted(RKHSError, RuntimeError):
    """Rejection sampling gave up."""


class PolySyntaxError(RKHSError, ValueError):
    """Malformed polynomial expression."""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NotDivisible(RKHSError, ArithmeticError):
    """Polynomial division left a nonzero remainder."""


class NotInvariant(RKHSError, ValueError):
    """Polynomial is not sigma-invariant."""


class NotAntiInvariant(RKHSError, ValueError):
    """Polynomial is not sigma-anti-invariant."""


class UnsupportedSpace(RKHSError, ValueError):
    """No monomial norm formula is available for the requested space."""


class CapError(RKHSError, ValueError):
    """Requested series truncation exceeds the allowed degree cap."""


class SpectrumOutsideDomain(RKHSError, ValueError):
    """Joint spectrum of a tuple is not inside the domain."""


class HypothesisFailed(RKHSError):
    """The hereditary positivity hypothesis does not hold."""


class CampaignDegenerate(RKHSError):
    """Too many samples were skipped for a campaign to be meaningful."""
