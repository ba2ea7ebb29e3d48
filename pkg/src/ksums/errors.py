"""Exception types shared across the package."""


class DomainError(ValueError):
    """A documented precondition was violated (CLI exit code 2)."""


class NotInvertible(DomainError):
    """Modular inversion failed; carries the offending gcd."""

    def __init__(self, n, q, gcd, index=None):
        self.n = n
        self.q = q
        self.gcd = gcd
        self.index = index
        at = f" at index {index}" if index is not None else ""
        super().__init__(f"{n} is not invertible mod {q}{at}: gcd = {gcd}")


class InconsistencyError(RuntimeError):
    """Two supposedly-equal computation routes disagreed (CLI exit code 3)."""
