"""Influence maximization as a combinatorial multi-armed bandit.

Independent-cascade simulation, influence-maximization oracles, edge- and
node-level feedback estimators, exploration/exploitation strategies and the
closed-form bounds that go with them.
"""

from .bandit import (
    GameResult,
    InfluenceBandit,
    StrategyConfig,
    check_sample_complexity,
    choose_superarm,
    cucb_adjust,
    explore,
    exploit,
    node_value,
    node_values,
    run_game,
)
from .diffusion import (
    Cascade,
    PossibleWorld,
    estimate_spread_mc,
    estimate_value_spread_mc,
    exact_spread,
    exact_spread_function,
    sample_world,
    simulate_cascade,
)
from .exceptions import (
    BudgetError,
    CascadeIntegrityError,
    DuplicateEdgeError,
    EdgeListParseError,
    LikelihoodSingularityError,
    NoCorrelationDecayError,
    ProbabilityRangeError,
    TooManyEdgesError,
    UndefinedMetricError,
)
from .feedback import (
    EdgeLevelEstimator,
    EstimatorState,
    MleConfig,
    NodeLevelFrequentistEstimator,
    OnlineMLEEstimator,
    assign_node_level_credit,
    make_estimator,
    update_edge_level,
    update_node_level_frequentist,
    update_node_level_mle,
)
from .graph import (
    Graph,
    assign_constant,
    assign_weighted_cascade,
    correlation_decay,
    load_edge_list,
    random_graph,
    read_edge_list,
    scale_probabilities,
)
from .metrics import (
    failure_prob_bound,
    failure_prob_exact,
    fraction_within,
    mle_loss_gap_bound,
    node_level_mean,
    node_level_relative_error,
    mle_average_loss_gap_bound,
    relative_l2_error,
    sample_complexity_bound,
)
from .oracle import OracleConfig, greedy_select, rr_generate, rr_select, select_seeds, value_spread_select

__version__ = "0.1.0"
