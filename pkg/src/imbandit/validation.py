"""Input validation helpers shared by the estimators and the functional API."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .exceptions import BudgetError, ProbabilityRangeError

__all__ = ["check_graph", "check_probabilities", "check_seed_set", "check_budget", "check_prior"]


def check_graph(g):
    from .graph import Graph

    if not isinstance(g, Graph):
        raise TypeError(f"expected a Graph, got {type(g).__name__}")
    return g


def check_probabilities(probs, g) -> np.ndarray:
    """Return ``probs`` as a contiguous float64 vector with one entry per edge."""
    p = np.ascontiguousarray(probs, dtype=np.float64)
    if p.shape != (g.n_edges,):
        raise ValueError(f"expected {g.n_edges} edge probabilities, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any((p < 0.0) | (p > 1.0)):
        raise ProbabilityRangeError("edge probabilities must lie in [0, 1]")
    return p


def check_seed_set(seeds: Iterable[int], g) -> np.ndarray:
    """Sorted, de-duplicated int64 array of valid node ids."""
    s = np.unique(np.asarray(list(seeds) if not isinstance(seeds, np.ndarray) else seeds, dtype=np.int64))
    if s.size and (s[0] < 0 or s[-1] >= g.n_nodes):
        raise ValueError("seed ids must lie in [0, n_nodes)")
    return s


def check_budget(k: int, g) -> int:
    if isinstance(k, bool) or int(k) != k:
        raise BudgetError(f"budget must be an integer, got {k!r}")
    k = int(k)
    if k < 1 or k > g.n_nodes:
        raise BudgetError(f"budget {k} outside [1, {g.n_nodes}]")
    return k


def check_prior(prior):
    """``None`` or a pair of positive reals."""
    if prior is None:
        return None
    a, b = (float(x) for x in prior)
    if not (a > 0 and b > 0):
        raise ValueError("Beta prior parameters must be positive")
    return a, b
