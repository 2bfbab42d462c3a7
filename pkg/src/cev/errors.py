"""
Error types raised by the CEV pricing library
"""
from typing import Optional


class CevError(Exception):
    """Base class for every error raised by this package"""


class DomainError(CevError, ValueError):
    """An argument lies outside the domain of the operation"""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")

    def __reduce__(self):
        return type(self), (self.field, self.reason)


class NonConvergence(CevError, ArithmeticError):
    """A series ran out of its term budget before the tail bound was met"""

    def __init__(self, what: str, terms: int, partial_sum: Optional[float] = None):
        self.what = what
        self.terms = terms
        self.partial_sum = partial_sum
        message = f"{what}: no convergence after {terms} terms"
        if partial_sum is not None:
            message += f" (partial sum {partial_sum!r})"
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.what, self.terms, self.partial_sum)
