"""Typed errors raised by the solver library and CLI."""


class ViforgeError(Exception):
    """Base class for all library errors."""


class RankDeficient(ViforgeError):
    """Equality matrix is numerically rank deficient; (C C^T)^-1 is ill posed."""


class IterationBudgetExceeded(ViforgeError):
    """An iterative routine hit its step cap before reaching tolerance."""


class DomainError(ViforgeError):
    """Standard log barrier evaluated at an infeasible point (slack >= 0)."""


class ParamOutOfRange(ViforgeError):
    """A constructor or config parameter violates its documented range."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DimensionMismatch(ViforgeError):
    """Vector or matrix dimensions are inconsistent."""


class SingularSystem(ViforgeError):
    """Closed-form linear solve failed (singular or non-finite system)."""


class NonFiniteIterate(ViforgeError):
    """An iterate overflowed or became NaN; usually the step size is too large."""


class NonCompactSet(ViforgeError):
    """Gap evaluation requires a compact set (box or simplex blocks, or declared bounds)."""


class DimensionTooLarge(ViforgeError):
    """Brute-force vertex enumeration is capped at 2^12 vertices."""


class NoConvergence(ViforgeError):
    """A high-precision oracle routine hit its iteration cap."""


class ConfigError(ViforgeError):
    """Invalid or missing experiment configuration field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
