"""
qlext - Error types

Solvers report an unsolvable instance as an absent result. The exceptions
below are reserved for bad input and for broken internal invariants.
"""
from typing import Optional


class QlextError(Exception):
    """Base class for all qlext errors"""


class PreconditionError(QlextError, ValueError):
    """An operation was called outside its preconditions"""


class ValidationError(QlextError, ValueError):
    """A value does not satisfy the invariants of its type"""


class StructuralError(QlextError, ValueError):
    """A layout does not cover exactly the vertices and edges of its graph"""


class InstanceParseError(ValidationError):
    """
    An instance or solution document could not be parsed.

    Attributes:
        key: JSON key the problem was found under (None for malformed JSON)
    """

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class ConsistencyError(QlextError, RuntimeError):
    """An internal invariant failed. Never caused by valid input."""


class GenerationError(QlextError):
    """A generator could not realize its configuration"""


class BudgetExhaustedError(QlextError):
    """The oracle ran out of its step budget under the fail policy"""

    def __init__(self, steps: int):
        super().__init__(f"Oracle budget exhausted after {steps} steps")
        self.steps = steps
