"""Exception hierarchy shared by all pgnkit modules."""


class PGNError(Exception):
    pass


class DomainError(PGNError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidTemplateError(PGNError, ValueError):
    """A path that should satisfy the template axioms does not."""


class BudgetExceededError(PGNError, RuntimeError):
    """Lattice enumeration would visit more candidates than allowed."""

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class FlowRangeError(PGNError, OverflowError):
    """Flow time too large for binary64 scaling factors."""

    def __init__(self, message, safe_bound=None):
        super().__init__(message)
        self.safe_bound = safe_bound


class InvariantError(PGNError, ArithmeticError):
    """A numeric invariant (e.g. Minkowski's bounds) failed to hold."""
