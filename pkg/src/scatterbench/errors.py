"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Inputs are malformed or mutually inconsistent (shape, grid, label)."""


class RefusalError(ValueError):
    """A precondition of the requested operation does not hold.

    Raised when running the operation would be meaningless, e.g. certifying
    a bound on a filter bank that violates the bound's hypothesis, or
    building a bank the grid cannot resolve.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ConstructionError(ValueError):
    """A builder could not satisfy its construction guarantees."""
