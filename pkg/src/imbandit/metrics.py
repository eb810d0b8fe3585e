"""Estimation-error metrics and closed-form bounds.

The bound functions cover credit-assignment failure under node-level
feedback, the cascade count needed by random exploration with edge-level
feedback, and the online-vs-batch likelihood gap of online MLE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import NoCorrelationDecayError, UndefinedMetricError

__all__ = [
    "MetricsRow",
    "relative_l2_error",
    "fraction_within",
    "failure_prob_exact",
    "failure_prob_bound",
    "node_level_relative_error",
    "node_level_mean",
    "sample_complexity_bound",
    "mle_loss_gap_bound",
    "mle_average_loss_gap_bound",
]


@dataclass
class MetricsRow:
    round: int
    spread_learned: float
    spread_true: float
    regret: float
    cumulative_avg_regret: float
    l2_rel_error: float
    frac_within_p: dict[float, float] = field(default_factory=dict)


def relative_l2_error(mu_hat, mu_true) -> float:
    """``||mu_hat - mu|| / ||mu||``."""
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    mu_true = np.asarray(mu_true, dtype=np.float64)
    if mu_hat.shape != mu_true.shape:
        raise ValueError("mu_hat and mu_true differ in length")
    norm = float(np.linalg.norm(mu_true))
    if norm == 0.0:
        raise UndefinedMetricError("true probability vector has zero norm")
    return float(np.linalg.norm(mu_hat - mu_true)) / norm


def fraction_within(mu_hat, mu_true, p: float) -> float:
    """Fraction of edges whose relative error is at most ``p``.

    Edges with a true probability of 0 have no relative error and are left
    out of the denominator.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    mu_true = np.asarray(mu_true, dtype=np.float64)
    keep = mu_true != 0
    if not keep.any():
        return 1.0
    rel = np.abs(mu_hat[keep] - mu_true[keep]) / mu_true[keep]
    return float(np.mean(rel <= p))


def failure_prob_exact(p_star: Sequence[float], i: int) -> float:
    """Probability that random credit assignment gets edge ``i`` wrong.

    ``p_star`` are the true probabilities of the edges from the ``K``
    parents that became active together. Edge ``i`` is wrongly inferred live
    when it is dead but another parent's edge is live and ``i`` wins the
    1/K draw, and wrongly inferred dead when it is live and loses the draw.
    """
    p = np.asarray(p_star, dtype=np.float64)
    K = p.size
    if K < 1:
        raise ValueError("need at least one parent")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    others = np.delete(p, i)
    none_other_live = float(np.prod(1.0 - others))
    return (1.0 / K) * (1.0 - p[i]) * (1.0 - none_other_live) + (1.0 - 1.0 / K) * p[i]


def failure_prob_bound(K: int, p_min: float, p_max: float) -> float:
    """Worst case of :func:`failure_prob_exact` over probabilities in ``[p_min, p_max]``."""
    if int(K) != K or K < 1:
        raise ValueError("K must be a positive integer")
    if not 0.0 <= p_min <= p_max <= 1.0:
        raise ValueError("need 0 <= p_min <= p_max <= 1")
    K = int(K)
    return (1.0 / K) * (1.0 - p_min) * (1.0 - (1.0 - p_max) ** (K - 1)) + (1.0 - 1.0 / K) * p_max


def node_level_relative_error(mu_edge_level: float, rho: float) -> float:
    """Relative gap between node- and edge-level estimates: ``rho * |1/mu - 2|``."""
    if not 0.0 < mu_edge_level <= 1.0:
        raise UndefinedMetricError("edge-level estimate must lie in (0, 1]")
    return rho * abs(1.0 / mu_edge_level - 2.0)


def node_level_mean(successes: int, triggers: int, rho: float) -> float:
    """Expected node-level estimate: each true success flips with prob ``rho``, each failure too."""
    if triggers <= 0:
        raise UndefinedMetricError("no triggers")
    return (successes * (1.0 - rho) + (triggers - successes) * rho) / triggers


def sample_complexity_bound(
    gamma: float, n_nodes: int, k: int, p_star: float, epsilon: float, delta: float
) -> int:
    """Cascades needed to learn one edge to relative error ``epsilon`` w.p. ``1 - delta``.

    Returns ``ceil(3 gamma |V| ln(1/delta) / (epsilon^2 p_star k))``. A
    relative slack of 1e-9 absorbs rounding so exact integers stay exact.
    """
    if gamma <= 0.0:
        raise NoCorrelationDecayError("gamma must be positive (no correlation decay)")
    if not gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if not (0.0 < epsilon < 1.0 and 0.0 < delta <= 1.0):
        raise ValueError("epsilon must lie in (0, 1) and delta in (0, 1]")
    if not 0.0 < p_star <= 1.0:
        raise ValueError("p_star must lie in (0, 1]")
    if n_nodes < 1 or k < 1:
        raise ValueError("n_nodes and k must be positive")
    value = 3.0 * gamma * n_nodes * math.log(1.0 / delta) / (epsilon**2 * p_star * k)
    return max(0, math.ceil(value * (1.0 - 1e-9)))


def mle_loss_gap_bound(d_v: float, theta_max: float, T: int, G: float) -> float:
    """``d_v theta_max^2 sqrt(T) / 2 + (sqrt(T) - 1/2) G^2``."""
    if min(d_v, theta_max, G) < 0:
        raise ValueError("arguments must be non-negative")
    if T < 1:
        raise ValueError("T must be at least 1")
    root = math.sqrt(T)
    return d_v * theta_max**2 * root / 2.0 + (root - 0.5) * G**2


def mle_average_loss_gap_bound(d_v: float, theta_max: float, T: int, G: float) -> float:
    return mle_loss_gap_bound(d_v, theta_max, T, G) / T
