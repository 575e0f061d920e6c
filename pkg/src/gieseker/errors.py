class DomainError(ValueError):
    """A mathematical precondition of an operation was violated."""
