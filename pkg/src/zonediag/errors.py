"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point or parameter lies outside the domain of an operation."""


class UnsupportedOperation(RuntimeError):
    """The operation is not defined for this kind of space."""


class PreconditionError(ValueError):
    """A hypothesis required by a check does not hold.

    ``hypothesis`` names the violated assumption so that reports can cite it.
    """

    def __init__(self, message, hypothesis=None):
        super().__init__(message)
        self.hypothesis = hypothesis
