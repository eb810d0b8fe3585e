"""The combinatorial bandit game for influence maximization.

Each round a strategy picks ``k`` seeds (its superarm is their out-edges),
one true possible world is sampled, the learned seeds' cascade on that world
is fed back to the estimator, and the benchmark seeds' cascade on the same
world gives the regret for the round.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._random import BENCHMARK, CREDIT, ENVIRONMENT, STRATEGY, derive_rng
from .diffusion import sample_world, simulate_cascade
from .feedback import EstimatorState, MleConfig, make_estimator, update_edge_level
from .graph import Graph, correlation_decay
from .metrics import fraction_within, relative_l2_error, sample_complexity_bound
from .oracle import OracleConfig, select_seeds, value_spread_select
from .validation import check_budget, check_graph, check_prior

__all__ = [
    "StrategyConfig",
    "RoundRecord",
    "GameResult",
    "explore",
    "exploit",
    "cucb_adjust",
    "node_value",
    "node_values",
    "choose_superarm",
    "run_game",
    "InfluenceBandit",
    "SampleComplexityCheck",
    "check_sample_complexity",
    "STRATEGY_ALIASES",
    "FEEDBACK_ALIASES",
]

STRATEGIES = (
    "cucb",
    "epsilon-greedy",
    "initial-exploration",
    "pure-exploitation",
    "random-exploration",
    "strategic-exploration",
)
STRATEGY_ALIASES = {
    "cucb": "cucb",
    "eg": "epsilon-greedy",
    "ie": "initial-exploration",
    "pe": "pure-exploitation",
    "re": "random-exploration",
    "se": "strategic-exploration",
}
FEEDBACK_ALIASES = {
    "el": "edge-level",
    "nlf": "node-level-frequentist",
    "nlml": "node-level-mle",
}


@dataclass(frozen=True)
class StrategyConfig:
    """Seed-selection strategy, feedback mechanism and their knobs.

    ``omega`` drives the epsilon-greedy schedule ``min(1, omega / s)``;
    ``zeta`` is the fraction of initial rounds spent exploring.
    """

    kind: str = "epsilon-greedy"
    feedback: str = "edge-level"
    k: int = 5
    rounds: int = 100
    omega: float = 5.0
    zeta: float = 0.2
    prior: Optional[tuple[float, float]] = None
    mle: MleConfig = field(default_factory=MleConfig)

    def __post_init__(self):
        kind = STRATEGY_ALIASES.get(self.kind, self.kind)
        feedback = FEEDBACK_ALIASES.get(self.feedback, self.feedback)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "feedback", feedback)
        object.__setattr__(self, "prior", check_prior(self.prior))
        if kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if feedback not in FEEDBACK_ALIASES.values():
            raise ValueError(f"unknown feedback {self.feedback!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise ValueError("rounds must be a positive integer")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError("zeta must lie in [0, 1]")

    def exploration_probability(self, s: int) -> float:
        return min(1.0, self.omega / s)

    def explores_initially(self, s: int) -> bool:
        # tolerance absorbs products like 0.1 * 30 = 3.0000000000000004
        return s <= math.floor(self.zeta * self.rounds + 1e-9)


@dataclass
class RoundRecord:
    round: int
    seeds: tuple
    explored: bool
    superarm_size: int
    spread_learned: int
    spread_true: int
    regret: int
    l2_rel_error: float
    frac_within: dict
    edges_triggered: int


@dataclass
class GameResult:
    records: list[RoundRecord]
    state: EstimatorState
    benchmark_seeds: tuple
    world_digests: list[str]

    @property
    def regret(self) -> np.ndarray:
        return np.array([r.regret for r in self.records], dtype=np.float64)

    @property
    def total_regret(self) -> float:
        return float(self.regret.sum()) if self.records else 0.0

    @property
    def cumulative_avg_regret(self) -> np.ndarray:
        reg = self.regret
        return np.cumsum(reg) / np.arange(1, reg.size + 1)

    @property
    def l2_rel_error(self) -> np.ndarray:
        return np.array([r.l2_rel_error for r in self.records])

    def window_mean_regret(self, start: int, stop: int) -> float:
        """Mean regret over rounds ``start..stop`` inclusive (1-based)."""
        return float(self.regret[start - 1 : stop].mean())


def explore(g: Graph, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` distinct nodes uniformly at random."""
    k = check_budget(k, g)
    return np.sort(rng.choice(g.n_nodes, size=k, replace=False)).astype(np.int64)


def exploit(
    g: Graph,
    probs: np.ndarray,
    oracle_cfg: OracleConfig,
    k: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Oracle seed set under the current estimates ``probs``."""
    return select_seeds(g, probs, k, oracle_cfg, rng)


def cucb_adjust(state: EstimatorState, s: int) -> np.ndarray:
    """Optimistic means ``min(1, mu_hat + sqrt(3 ln s / (2 T_i)))``; untriggered edges get 1."""
    if s < 1:
        raise ValueError("round index must be >= 1")
    T = state.trigger_count
    with np.errstate(divide="ignore", invalid="ignore"):
        bonus = np.sqrt(3.0 * math.log(s) / (2.0 * T))
    adjusted = np.where(T > 0, state.mu_hat + bonus, 1.0)
    return np.minimum(adjusted, 1.0)


def node_values(state: EstimatorState, g: Graph) -> np.ndarray:
    """Per node, the sum of ``1 / (T + 1)`` over its out-edges."""
    weights = 1.0 / (state.trigger_count + 1.0)
    return np.bincount(g.src, weights=weights, minlength=g.n_nodes).astype(np.float64)


def node_value(state: EstimatorState, g: Graph, u: int) -> float:
    ids = g.out_edge_ids(u)
    return float(np.sum(1.0 / (state.trigger_count[ids] + 1.0)))


def choose_superarm(
    strategy: StrategyConfig,
    s: int,
    g: Graph,
    state: EstimatorState,
    oracle_cfg: OracleConfig,
    rng: np.random.Generator,
    mc_eval_sims: int = 200,
) -> tuple[np.ndarray, bool]:
    """Seeds for round ``s`` and whether the round was an exploration round."""
    if not 1 <= s <= strategy.rounds:
        raise ValueError(f"round {s} outside 1..{strategy.rounds}")
    kind = strategy.kind
    k = strategy.k
    if kind == "cucb":
        return exploit(g, cucb_adjust(state, s), oracle_cfg, k, rng), False
    if kind == "epsilon-greedy":
        if rng.random() < strategy.exploration_probability(s):
            return explore(g, k, rng), True
        return exploit(g, state.mu_hat, oracle_cfg, k, rng), False
    if kind == "initial-exploration":
        if strategy.explores_initially(s):
            return explore(g, k, rng), True
        return exploit(g, state.mu_hat, oracle_cfg, k, rng), False
    if kind == "pure-exploitation":
        return exploit(g, state.mu_hat, oracle_cfg, k, rng), False
    if kind == "random-exploration":
        return explore(g, k, rng), True
    values = node_values(state, g)
    cfg = OracleConfig(kind="greedy", n_sims=mc_eval_sims)
    return value_spread_select(g, state.mu_hat, values, k, cfg, rng), True


def _digest(live: np.ndarray) -> str:
    return hashlib.blake2b(np.packbits(live).tobytes(), digest_size=8).hexdigest()


def run_game(
    g: Graph,
    strategy: StrategyConfig,
    oracle_cfg: Optional[OracleConfig] = None,
    mc_eval_sims: int = 200,
    master_seed: int = 0,
    precisions: Sequence[float] = (0.1,),
    initial_state: Optional[EstimatorState] = None,
) -> GameResult:
    """Play ``strategy.rounds`` rounds and account regret against a fixed benchmark.

    The benchmark seeds come from one oracle call on the true probabilities
    before round 1. Environment worlds, strategy choices, credit assignment
    and the benchmark each draw from their own stream derived from
    ``master_seed``, so the world sequence does not depend on the feedback
    mechanism. ``mc_eval_sims`` sets the world count of the value-spread
    estimate used by strategic exploration.
    """
    g = check_graph(g)
    check_budget(strategy.k, g)
    oracle_cfg = oracle_cfg or OracleConfig()
    truth = g.true_prob

    benchmark = select_seeds(g, truth, strategy.k, oracle_cfg, derive_rng(master_seed, BENCHMARK))
    estimator = make_estimator(
        strategy.feedback,
        prior=strategy.prior,
        random_state=derive_rng(master_seed, CREDIT),
        mle=strategy.mle,
    )
    estimator.initialize(g)
    if initial_state is not None:
        if initial_state.n_edges != g.n_edges:
            raise ValueError("initial_state has the wrong number of edges")
        estimator.state_ = initial_state.copy()
    state = estimator.state_
    env = derive_rng(master_seed, ENVIRONMENT)
    has_truth = bool(np.any(truth != 0))

    records: list[RoundRecord] = []
    digests: list[str] = []
    for s in range(1, strategy.rounds + 1):
        rng = derive_rng(master_seed, STRATEGY, s)
        seeds, explored = choose_superarm(strategy, s, g, state, oracle_cfg, rng, mc_eval_sims)
        world = sample_world(g, env)
        digests.append(_digest(world.live))
        learned = simulate_cascade(g, world, seeds)
        estimator.partial_fit(learned)
        state = estimator.state_
        bench = simulate_cascade(g, world, benchmark)
        l2 = relative_l2_error(state.mu_hat, truth) if has_truth else float("nan")
        records.append(
            RoundRecord(
                round=s,
                seeds=tuple(int(x) for x in seeds),
                explored=explored,
                superarm_size=int(sum(g.out_degree[int(x)] for x in seeds)),
                spread_learned=learned.spread,
                spread_true=bench.spread,
                regret=bench.spread - learned.spread,
                l2_rel_error=l2,
                frac_within={p: fraction_within(state.mu_hat, truth, p) for p in precisions},
                edges_triggered=int(np.count_nonzero(state.trigger_count)),
            )
        )
    return GameResult(
        records=records,
        state=state,
        benchmark_seeds=tuple(int(x) for x in benchmark),
        world_digests=digests,
    )


class InfluenceBandit(BaseEstimator):
    """Learn influence probabilities by playing the bandit game on a graph.

    ``fit(graph)`` plays ``rounds`` rounds; afterwards ``mu_hat_`` holds the
    learned edge probabilities, ``result_`` the per-round records, and
    ``predict()`` returns the oracle's seed set under the learned estimates.
    """

    def __init__(
        self,
        strategy="epsilon-greedy",
        feedback="edge-level",
        k=5,
        rounds=100,
        omega=5.0,
        zeta=0.2,
        prior=None,
        oracle="rr:10000",
        mc_eval_sims=200,
        eta0=1.0,
        master_seed=0,
    ):
        self.strategy = strategy
        self.feedback = feedback
        self.k = k
        self.rounds = rounds
        self.omega = omega
        self.zeta = zeta
        self.prior = prior
        self.oracle = oracle
        self.mc_eval_sims = mc_eval_sims
        self.eta0 = eta0
        self.master_seed = master_seed

    def _config(self) -> StrategyConfig:
        return StrategyConfig(
            kind=self.strategy,
            feedback=self.feedback,
            k=self.k,
            rounds=self.rounds,
            omega=self.omega,
            zeta=self.zeta,
            prior=self.prior,
            mle=MleConfig(eta0=self.eta0),
        )

    def _oracle(self) -> OracleConfig:
        if isinstance(self.oracle, OracleConfig):
            return self.oracle
        return OracleConfig.parse(self.oracle)

    def fit(self, X: Graph, y=None):
        g = check_graph(X)
        self.result_ = run_game(g, self._config(), self._oracle(), self.mc_eval_sims, self.master_seed)
        self.graph_ = g
        return self

    @property
    def mu_hat_(self) -> np.ndarray:
        check_is_fitted(self, "result_")
        return self.result_.state.mu_hat

    def predict(self, X: Optional[Graph] = None) -> np.ndarray:
        """Seed set chosen by the oracle under the learned probabilities."""
        check_is_fitted(self, "result_")
        g = self.graph_ if X is None else check_graph(X)
        rng = derive_rng(self.master_seed, BENCHMARK, 1)
        return select_seeds(g, self.mu_hat_, self.k, self._oracle(), rng)

    def score(self, X: Optional[Graph] = None, y=None) -> float:
        """Negative mean per-round regret of the fitted game."""
        check_is_fitted(self, "result_")
        return -float(self.result_.regret.mean())


@dataclass
class SampleComplexityCheck:
    gamma: float
    edge: int
    p_star: float
    cascades: int
    repetitions: int
    successes: int
    relative_errors: np.ndarray

    @property
    def success_rate(self) -> float:
        return self.successes / self.repetitions


def check_sample_complexity(
    g: Graph,
    k: int,
    epsilon: float,
    delta: float,
    repetitions: int = 50,
    master_seed: int = 0,
    edge: Optional[int] = None,
) -> SampleComplexityCheck:
    """Run random exploration with edge-level feedback for the bound's cascade count.

    The graph must have correlation decay (every incoming probability sum
    below 1). The monitored edge defaults to the most probable one (lowest id
    on ties). Each repetition counts as a success when the learned estimate
    of that edge is within relative error ``epsilon`` of the truth.
    """
    gamma = correlation_decay(g)
    k = check_budget(k, g)
    if edge is None:
        edge = int(np.argmax(g.true_prob))
    p_star = float(g.true_prob[edge])
    cascades = sample_complexity_bound(gamma, g.n_nodes, k, p_star, epsilon, delta)
    errors = np.empty(repetitions)
    for r in range(repetitions):
        env = derive_rng(master_seed, ENVIRONMENT, r)
        pick = derive_rng(master_seed, STRATEGY, r)
        state = EstimatorState.initial(g.n_edges)
        for _ in range(cascades):
            seeds = explore(g, k, pick)
            update_edge_level(state, simulate_cascade(g, sample_world(g, env), seeds))
        errors[r] = abs(state.mu_hat[edge] - p_star) / p_star
    successes = int(np.count_nonzero(errors <= epsilon))
    return SampleComplexityCheck(gamma, edge, p_star, cascades, repetitions, successes, errors)
