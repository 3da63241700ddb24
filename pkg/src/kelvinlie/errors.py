"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition (bad shape, not SPD, ...)."""


class BranchError(ValidationError):
    """A rotation logarithm was requested at the branch boundary (angle pi)."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""
