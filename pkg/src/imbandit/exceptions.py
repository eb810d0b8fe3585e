"""Exception types raised across the package.

All of them derive from :class:`ValueError` so callers that only care about
"bad input" can catch one thing.
"""

from __future__ import annotations


class EdgeListParseError(ValueError):
    """A line of an edge-list file could not be parsed."""

    def __init__(self, message: str, lineno: int | None = None) -> None:
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ProbabilityRangeError(EdgeListParseError):
    """An influence probability lies outside [0, 1]."""


class DuplicateEdgeError(EdgeListParseError):
    """The same (source, target) pair was given twice."""


class NoCorrelationDecayError(ValueError):
    """Some node's incoming probability mass is >= 1, so no decay bound exists."""


class TooManyEdgesError(ValueError):
    """Brute-force enumeration was requested on a graph that is too large."""


class BudgetError(ValueError):
    """Seed budget is not in [1, node_count]."""


class CascadeIntegrityError(ValueError):
    """A cascade record violates the IC timing rules."""


class LikelihoodSingularityError(ArithmeticError):
    """The activation term of the cascade likelihood hit ln(0)."""


class UndefinedMetricError(ValueError):
    """A metric was requested where it has no defined value."""
