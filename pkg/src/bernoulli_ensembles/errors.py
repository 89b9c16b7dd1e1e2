"""Exception hierarchy.

Each class carries the process exit code the CLI uses for it:
2 for domain errors, 3 for resource caps, 4 for numerical failures.
"""


class EnsembleError(Exception):
    exit_code = 1


class DomainError(EnsembleError, ValueError):
    """Argument outside the domain of a function."""

    exit_code = 2


class OutOfDomain(DomainError):
    """Macroscopic state (rho, m) not strictly inside D."""


class InfeasibleConstraint(DomainError):
    """No configuration satisfies the requested (K, M) or forced sites."""


class DegenerateCorrelation(DomainError):
    """Correlation with |lambda| >= 1; the Gaussian density does not exist."""


class IntervalMismatch(DomainError):
    """Two curves do not live on the same interval."""


class CapExceeded(EnsembleError):
    """Problem size beyond a configured resource cap."""

    exit_code = 3


class NoConvergence(EnsembleError, ArithmeticError):
    exit_code = 4


class GridTooCoarse(EnsembleError):
    """Finite-difference stencil needs more grid points."""

    exit_code = 4
