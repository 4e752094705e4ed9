"""Exception types raised across the package."""


class DomainError(ValueError):
    """An input violates an operation's precondition."""


class NoRealBranchError(DomainError):
    """A closed-form inversion has no real solution at the given input."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to produce a trustworthy answer."""


class ConvergenceError(NumericalError):
    """An iteration left its admissible region or did not settle."""


class SingularBasisError(NumericalError):
    """The overlap matrix of a truncated basis cannot be inverted reliably."""


class ResolutionError(NumericalError):
    """A finite-difference grid does not resolve the problem."""
