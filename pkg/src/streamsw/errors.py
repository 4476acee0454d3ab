"""Exception types shared across modules."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class RefusalError(RuntimeError):
    """Work refused because it would exceed a configured resource cap."""

    def __init__(self, message: str, required: int = 0, cap: int = 0):
        super().__init__(message)
        self.required = required
        self.cap = cap


class DecodeFailure(Exception):
    """No unique dominating candidate for a decoding stage."""
