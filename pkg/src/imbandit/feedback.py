"""Learning edge influence probabilities from observed cascades.

Three update mechanisms share one :class:`EstimatorState`:

* edge level: every attempted edge reports its true live/dead status;
* node-level frequentist: only activation times are seen, and credit for
  each activation goes to one uniformly chosen parent from the previous step;
* node-level online MLE: one projected gradient step per node per round on
  the cascade log-likelihood in ``theta = -ln(1 - p)`` coordinates.

The functional updates mutate the state in place and return it. The
estimator classes wrap them in the scikit-learn ``fit``/``partial_fit``
protocol, taking cascades as samples.
"""

from __future__ import annotations

import copy
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._random import RandomLike, check_rng
from .diffusion import Cascade
from .exceptions import CascadeIntegrityError, LikelihoodSingularityError
from .graph import Graph
from .validation import check_prior

__all__ = [
    "EstimatorState",
    "MleConfig",
    "update_edge_level",
    "assign_node_level_credit",
    "update_node_level_frequentist",
    "node_likelihood",
    "node_likelihood_grad",
    "mle_gradient_step",
    "update_node_level_mle",
    "snapshot_csv",
    "EdgeLevelEstimator",
    "NodeLevelFrequentistEstimator",
    "OnlineMLEEstimator",
    "make_estimator",
]

DEFAULT_THETA_MIN = 1e-6
DEFAULT_THETA_MAX = -math.log(1.0 - 0.99)


@dataclass(frozen=True)
class MleConfig:
    """Step size schedule ``eta0 / sqrt(s)`` and the box for theta."""

    eta0: float = 1.0
    theta_min: float = DEFAULT_THETA_MIN
    theta_max: float = DEFAULT_THETA_MAX

    def __post_init__(self):
        if not self.eta0 >= 0:
            raise ValueError("eta0 must be non-negative")
        if not 0 < self.theta_min < self.theta_max:
            raise ValueError("need 0 < theta_min < theta_max")

    def step_size(self, s: int) -> float:
        if s < 1:
            raise ValueError("round index must be >= 1")
        return self.eta0 / math.sqrt(s)


@dataclass
class EstimatorState:
    """Per-edge estimates and counts.

    ``theta`` is set only in MLE mode, where ``mu_hat = 1 - exp(-theta)``.
    Otherwise ``mu_hat`` is the (optionally Beta-smoothed) success frequency,
    0 for edges never triggered without a prior.
    """

    mu_hat: np.ndarray
    success_count: np.ndarray
    trigger_count: np.ndarray
    prior: Optional[tuple[float, float]] = None
    theta: Optional[np.ndarray] = None
    round_index: int = 0

    @classmethod
    def initial(
        cls,
        n_edges: int,
        prior: Optional[tuple[float, float]] = None,
        mle: Optional[MleConfig] = None,
    ) -> "EstimatorState":
        prior = check_prior(prior)
        state = cls(
            mu_hat=np.zeros(n_edges),
            success_count=np.zeros(n_edges, dtype=np.int64),
            trigger_count=np.zeros(n_edges, dtype=np.int64),
            prior=prior,
        )
        if mle is not None:
            start = mle.theta_min
            if prior is not None:
                start = -math.log1p(-prior[0] / (prior[0] + prior[1]))
            state.theta = np.full(n_edges, float(np.clip(start, mle.theta_min, mle.theta_max)))
        state.refresh()
        return state

    @property
    def n_edges(self) -> int:
        return int(self.mu_hat.shape[0])

    def refresh(self) -> None:
        """Recompute ``mu_hat`` from counts (or from theta in MLE mode)."""
        if self.theta is not None:
            self.mu_hat = -np.expm1(-self.theta)
        elif self.prior is not None:
            a, b = self.prior
            self.mu_hat = (self.success_count + a) / (self.trigger_count + a + b)
        else:
            with np.errstate(invalid="ignore", divide="ignore"):
                mu = self.success_count / self.trigger_count
            self.mu_hat = np.where(self.trigger_count > 0, mu, 0.0)

    def copy(self) -> "EstimatorState":
        return copy.deepcopy(self)

    def _record(self, edges: np.ndarray, rewards: np.ndarray) -> None:
        np.add.at(self.trigger_count, edges, 1)
        np.add.at(self.success_count, edges, rewards.astype(np.int64))


def update_edge_level(state: EstimatorState, cascade: Cascade) -> EstimatorState:
    """Count one trigger per attempted edge and one success per live one."""
    if cascade.live_status is None:
        raise ValueError("edge-level feedback needs edge statuses; got a node-level view")
    attempted = cascade.attempted
    state.trigger_count += attempted
    state.success_count += attempted & cascade.live_status
    state.round_index += 1
    state.refresh()
    return state


def assign_node_level_credit(cascade: Cascade, random_state: RandomLike = None) -> dict[int, int]:
    """Infer 0/1 rewards for attempted edges from activation times alone.

    For each non-seed active node ``v`` with ``K`` parents active one step
    earlier, one of those parent edges, chosen uniformly, gets reward 1 and
    the other ``K - 1`` get 0. Every other attempted edge into a non-seed
    node gets 0. Edges into seeds are left out. Edge statuses are never read.
    """
    rng = check_rng(random_state)
    g = cascade.graph
    times = cascade.activation_time
    is_seed = np.zeros(g.n_nodes, dtype=bool)
    is_seed[cascade.seeds] = True

    t_src = times[g.src]
    t_dst = times[g.dst]
    observed = (t_src >= 0) & ~is_seed[g.dst]
    credit_group = observed & (t_dst >= 0) & (t_src == t_dst - 1)

    rewards: dict[int, int] = {int(e): 0 for e in np.flatnonzero(observed)}
    active_nonseed = np.flatnonzero((times >= 0) & ~is_seed)
    for v in active_nonseed.tolist():
        ids = g.in_edge_ids(v)
        group = ids[credit_group[ids]]
        if group.size == 0:
            raise CascadeIntegrityError(
                f"node {v} active at step {int(times[v])} with no parent active at step {int(times[v]) - 1}"
            )
        pick = group[0] if group.size == 1 else group[rng.integers(group.size)]
        rewards[int(pick)] = 1
    return rewards


def update_node_level_frequentist(
    state: EstimatorState, cascade: Cascade, random_state: RandomLike = None
) -> EstimatorState:
    rewards = assign_node_level_credit(cascade.node_view(), random_state)
    if rewards:
        edges = np.fromiter(rewards.keys(), dtype=np.int64, count=len(rewards))
        values = np.fromiter(rewards.values(), dtype=np.int64, count=len(rewards))
        state._record(edges, values)
    state.round_index += 1
    state.refresh()
    return state


def _likelihood_masks(cascade: Cascade, v: int) -> tuple[np.ndarray, np.ndarray]:
    """(failed, succeeded) masks over the in-edges of ``v``, in in-edge order."""
    g = cascade.graph
    times = cascade.activation_time
    ids = g.in_edge_ids(v)
    t_par = times[g.src[ids]]
    t_v = times[v]
    if np.any(cascade.seeds == v):
        none = np.zeros(ids.size, dtype=bool)
        return none, none
    if t_v < 0:
        # every active parent attempted v during the cascade and failed
        failed = t_par >= 0
        return failed, np.zeros(ids.size, dtype=bool)
    failed = (t_par >= 0) & (t_par <= t_v - 2)
    succeeded = t_par == t_v - 1
    if not succeeded.any():
        raise CascadeIntegrityError(f"node {v} active with no parent one step earlier")
    return failed, succeeded


def node_likelihood(theta_slice: np.ndarray, cascade: Cascade, v: int) -> float:
    """Log-likelihood of what node ``v`` did in ``cascade``.

    ``theta_slice`` holds theta for the in-edges of ``v`` in
    ``graph.in_edge_ids(v)`` order. Failed attempts contribute ``-theta``;
    the parents active one step before ``v`` contribute
    ``ln(1 - exp(-sum theta))``.
    """
    theta_slice = np.asarray(theta_slice, dtype=np.float64)
    failed, succeeded = _likelihood_masks(cascade, v)
    value = -float(theta_slice[failed].sum())
    if succeeded.any():
        x = float(theta_slice[succeeded].sum())
        if x <= 0.0:
            raise LikelihoodSingularityError(f"activation term of node {v} has zero rate")
        value += math.log(-math.expm1(-x))
    return value


def node_likelihood_grad(theta_slice: np.ndarray, cascade: Cascade, v: int) -> np.ndarray:
    """Gradient of :func:`node_likelihood` with respect to ``theta_slice``."""
    theta_slice = np.asarray(theta_slice, dtype=np.float64)
    failed, succeeded = _likelihood_masks(cascade, v)
    grad = np.zeros_like(theta_slice)
    grad[failed] = -1.0
    if succeeded.any():
        x = float(theta_slice[succeeded].sum())
        if x <= 0.0:
            raise LikelihoodSingularityError(f"activation term of node {v} has zero rate")
        grad[succeeded] = 1.0 / math.expm1(x)
    return grad


def mle_gradient_step(
    state: EstimatorState, cascade: Cascade, v: int, cfg: MleConfig
) -> EstimatorState:
    """One projected ascent step on node ``v``'s likelihood.

    Uses ``eta = cfg.eta0 / sqrt(state.round_index)``; the caller advances
    ``round_index`` once per round before stepping the nodes.
    """
    if state.theta is None:
        raise ValueError("state is not in MLE mode")
    ids = cascade.graph.in_edge_ids(v)
    if ids.size == 0:
        return state
    eta = cfg.step_size(max(state.round_index, 1))
    theta = state.theta[ids]
    grad = node_likelihood_grad(theta, cascade, v)
    state.theta[ids] = np.clip(theta + eta * grad, cfg.theta_min, cfg.theta_max)
    state.mu_hat[ids] = -np.expm1(-state.theta[ids])
    return state


def update_node_level_mle(state: EstimatorState, cascade: Cascade, cfg: MleConfig) -> EstimatorState:
    """Advance the round and step every node that saw at least one attempt."""
    view = cascade.node_view()
    g = view.graph
    times = view.activation_time
    state.round_index += 1
    observed = times[g.src] >= 0
    not_seed = np.ones(g.n_nodes, dtype=bool)
    not_seed[view.seeds] = False
    observed &= not_seed[g.dst]
    np.add.at(state.trigger_count, np.flatnonzero(observed), 1)
    for v in np.unique(g.dst[observed]).tolist():
        mle_gradient_step(state, view, v, cfg)
    state.refresh()
    return state


def snapshot_csv(state: EstimatorState, g: Graph) -> str:
    """``edge_id,u,v,mu_hat,trigger_count,success_count[,theta]`` rows."""
    out = io.StringIO()
    header = "edge_id,u,v,mu_hat,trigger_count,success_count"
    if state.theta is not None:
        header += ",theta"
    out.write(header + "\n")
    for e in range(g.n_edges):
        row = f"{e},{int(g.src[e])},{int(g.dst[e])},{float(state.mu_hat[e])!r},{int(state.trigger_count[e])},{int(state.success_count[e])}"
        if state.theta is not None:
            row += f",{float(state.theta[e])!r}"
        out.write(row + "\n")
    return out.getvalue()


def _as_cascades(X) -> list[Cascade]:
    if isinstance(X, Cascade):
        return [X]
    cascades = list(X)
    if not all(isinstance(c, Cascade) for c in cascades):
        raise TypeError("expected Cascade objects")
    return cascades


class _CascadeEstimator(BaseEstimator):
    """Shared fit/partial_fit plumbing; subclasses implement ``_update``."""

    _mle = False

    def _init_state(self, graph: Graph) -> None:
        mle = self._mle_config() if self._mle else None
        self.state_ = EstimatorState.initial(graph.n_edges, prior=self.prior, mle=mle)
        self.graph_ = graph

    def initialize(self, graph: Graph):
        """Start from the initial estimates for ``graph`` without any cascade."""
        for attr in ("state_", "graph_", "rng_"):
            self.__dict__.pop(attr, None)
        self._init_state(graph)
        return self

    def fit(self, X: Union[Cascade, Iterable[Cascade]], y=None):
        """Learn from scratch on a batch of cascades from one graph."""
        cascades = _as_cascades(X)
        if not cascades:
            raise ValueError("need at least one cascade")
        for attr in ("state_", "graph_", "rng_"):
            self.__dict__.pop(attr, None)
        return self.partial_fit(cascades)

    def partial_fit(self, X: Union[Cascade, Iterable[Cascade]], y=None):
        """Update the current estimates with one or more new cascades."""
        cascades = _as_cascades(X)
        if not cascades:
            return self
        if not hasattr(self, "state_"):
            self._init_state(cascades[0].graph)
        for c in cascades:
            if c.graph.n_edges != self.state_.n_edges:
                raise ValueError("cascade comes from a different graph")
            self._update(c)
        return self

    @property
    def mu_hat_(self) -> np.ndarray:
        check_is_fitted(self, "state_")
        return self.state_.mu_hat

    def predict(self, X=None) -> np.ndarray:
        """Estimated influence probability per edge (``X`` is ignored)."""
        return self.mu_hat_.copy()


class EdgeLevelEstimator(_CascadeEstimator):
    """Frequentist estimates from full edge statuses."""

    def __init__(self, prior=None):
        self.prior = prior

    def _update(self, cascade: Cascade) -> None:
        update_edge_level(self.state_, cascade)


class NodeLevelFrequentistEstimator(_CascadeEstimator):
    """Frequentist estimates with random credit among simultaneous parents."""

    def __init__(self, prior=None, random_state=None):
        self.prior = prior
        self.random_state = random_state

    def _update(self, cascade: Cascade) -> None:
        if not hasattr(self, "rng_"):
            self.rng_ = check_rng(self.random_state)
        update_node_level_frequentist(self.state_, cascade.node_view(), self.rng_)


class OnlineMLEEstimator(_CascadeEstimator):
    """Online projected gradient ascent on the node-level log-likelihood.

    With a ``prior``, theta starts at the prior mean instead of ``theta_min``.
    """

    _mle = True

    def __init__(self, eta0=1.0, theta_min=DEFAULT_THETA_MIN, theta_max=DEFAULT_THETA_MAX, prior=None):
        self.eta0 = eta0
        self.theta_min = theta_min
        self.theta_max = theta_max
        self.prior = prior

    def _mle_config(self) -> MleConfig:
        return MleConfig(eta0=self.eta0, theta_min=self.theta_min, theta_max=self.theta_max)

    def _update(self, cascade: Cascade) -> None:
        update_node_level_mle(self.state_, cascade.node_view(), self._mle_config())


FEEDBACK_KINDS = ("edge-level", "node-level-frequentist", "node-level-mle")


def make_estimator(
    feedback: str,
    prior=None,
    random_state: RandomLike = None,
    mle: Optional[MleConfig] = None,
) -> _CascadeEstimator:
    """Estimator for a feedback mechanism name."""
    if feedback == "edge-level":
        return EdgeLevelEstimator(prior=prior)
    if feedback == "node-level-frequentist":
        return NodeLevelFrequentistEstimator(prior=prior, random_state=random_state)
    if feedback == "node-level-mle":
        mle = mle or MleConfig()
        return OnlineMLEEstimator(eta0=mle.eta0, theta_min=mle.theta_min, theta_max=mle.theta_max, prior=prior)
    raise ValueError(f"unknown feedback mechanism {feedback!r}; expected one of {FEEDBACK_KINDS}")
