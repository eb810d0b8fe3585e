import math
import pickle

import numpy as np
import pytest
from sklearn.base import clone

from imbandit import (
    BudgetError,
    EstimatorState,
    Graph,
    InfluenceBandit,
    OracleConfig,
    StrategyConfig,
    assign_weighted_cascade,
    choose_superarm,
    cucb_adjust,
    explore,
    exploit,
    node_value,
    node_values,
    random_graph,
    run_game,
)

GREEDY = OracleConfig("greedy", n_sims=50)


def state_with(mu, T):
    state = EstimatorState.initial(len(mu))
    state.trigger_count[:] = T
    state.mu_hat = np.asarray(mu, dtype=float)
    return state


@pytest.fixture(scope="module")
def wc100():
    return assign_weighted_cascade(random_graph(100, 3.0, random_state=1))


class TestStrategyConfig:
    def test_aliases(self):
        cfg = StrategyConfig("eg", "nlf")
        assert (cfg.kind, cfg.feedback) == ("epsilon-greedy", "node-level-frequentist")

    @pytest.mark.parametrize(
        "kwargs",
        [{"k": 0}, {"rounds": 0}, {"kind": "ucb2"}, {"feedback": "x"}, {"omega": 0}, {"zeta": 1.5}, {"prior": (0, 1)}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            StrategyConfig(**kwargs)

    def test_epsilon_schedule(self):
        cfg = StrategyConfig(omega=5, rounds=100)
        assert cfg.exploration_probability(10) == 0.5
        assert all(cfg.exploration_probability(s) == 1.0 for s in range(1, 6))

    def test_initial_exploration_window(self):
        cfg = StrategyConfig("initial-exploration", zeta=0.2, rounds=1000)
        explored = [s for s in range(1, 1001) if cfg.explores_initially(s)]
        assert explored == list(range(1, 201))


class TestExploreExploit:
    def test_all_nodes(self):
        g = Graph.from_edges(4, [(0, 1)])
        assert explore(g, 4, np.random.default_rng(0)).tolist() == [0, 1, 2, 3]

    def test_uniform(self):
        g = Graph.from_edges(4, [(0, 1)])
        rng = np.random.default_rng(1)
        counts = np.bincount([explore(g, 1, rng)[0] for _ in range(100_000)], minlength=4) / 100_000
        assert np.all(np.abs(counts - 0.25) <= 0.005)

    def test_budget(self):
        g = Graph.from_edges(4, [(0, 1)])
        with pytest.raises(BudgetError):
            explore(g, 0, np.random.default_rng(0))

    def test_exploit_true_probs_matches_oracle(self, wc100):
        from imbandit import select_seeds

        a = exploit(wc100, wc100.true_prob, OracleConfig(n_rr=2000), 5, np.random.default_rng(3))
        b = select_seeds(wc100, wc100.true_prob, 5, OracleConfig(n_rr=2000), np.random.default_rng(3))
        assert np.array_equal(a, b)

    def test_exploit_zero_estimates(self, wc100):
        seeds = exploit(wc100, np.zeros(wc100.n_edges), GREEDY, 5, np.random.default_rng(0))
        assert seeds.tolist() == [0, 1, 2, 3, 4]

    def test_exploit_star(self):
        g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (2, 1)])
        assert exploit(g, np.array([1.0, 1.0, 1.0, 0.0]), GREEDY, 1, np.random.default_rng(0)).tolist() == [0]


class TestCucb:
    def test_capped(self):
        s = round(math.exp(4))
        state = state_with([0.2], 6)
        # ln(55) is just above 4, the bonus is about 1 and the cap binds
        assert cucb_adjust(state, s)[0] == 1.0

    def test_exact_one(self):
        state = state_with([0.5], 6)
        assert cucb_adjust(state, math.e)[0] == pytest.approx(1.0)

    def test_bonus_value(self):
        state = state_with([0.1], 6)
        assert cucb_adjust(state, 3)[0] == pytest.approx(0.1 + math.sqrt(3 * math.log(3) / 12))

    def test_untriggered(self):
        state = state_with([0.0, 0.3], [0, 50])
        out = cucb_adjust(state, 1)
        assert out[0] == 1.0 and out[1] == pytest.approx(0.3)

    def test_optimism(self):
        rng = np.random.default_rng(0)
        for s in range(1, 200, 7):
            state = state_with(rng.uniform(0, 1, 30), rng.integers(0, 20, 30))
            adj = cucb_adjust(state, s)
            assert np.all(adj >= state.mu_hat) and np.all(adj <= 1.0)

    def test_round_positive(self):
        with pytest.raises(ValueError):
            cucb_adjust(state_with([0.1], 1), 0)


class TestNodeValue:
    def test_hand_value(self):
        g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        state = state_with([0, 0, 0], [0, 1, 3])
        assert node_value(state, g, 0) == pytest.approx(1.75)
        assert node_values(state, g)[0] == pytest.approx(1.75)

    def test_no_out_edges(self):
        g = Graph.from_edges(4, [(0, 1)])
        assert node_value(state_with([0], [0]), g, 3) == 0.0

    def test_decays(self):
        g = Graph.from_edges(2, [(0, 1)])
        assert node_value(state_with([0], [10**9]), g, 0) < 1e-8


class TestChooseSuperarm:
    def test_round_range(self, wc100):
        cfg = StrategyConfig("pe", rounds=5)
        with pytest.raises(ValueError):
            choose_superarm(cfg, 6, wc100, EstimatorState.initial(wc100.n_edges), GREEDY, np.random.default_rng(0))

    def test_explore_frequency(self, wc100):
        cfg = StrategyConfig("eg", omega=5, rounds=2000, k=2)
        state = EstimatorState.initial(wc100.n_edges)
        flags = []
        for s in range(1, 2001):
            rng = np.random.default_rng([7, s])
            # the coin is the first draw, so it can be read without running the oracle
            flags.append(rng.random() < cfg.exploration_probability(s))
        p = np.array([cfg.exploration_probability(s) for s in range(5, 2001)])
        count = sum(flags[4:])
        sd = math.sqrt(np.sum(p * (1 - p)))
        assert abs(count - p.sum()) <= 3 * sd
        for s in (1, 3, 10, 40):
            _, explored = choose_superarm(cfg, s, wc100, state, GREEDY, np.random.default_rng([7, s]))
            assert explored == flags[s - 1]

    def test_kinds(self, wc100):
        state = EstimatorState.initial(wc100.n_edges)
        rng = np.random.default_rng(0)
        for kind, expect in [("re", True), ("pe", False), ("cucb", False), ("se", True)]:
            seeds, explored = choose_superarm(StrategyConfig(kind, k=3), 1, wc100, state, GREEDY, rng, 20)
            assert explored == expect and len(set(seeds.tolist())) == 3
        ie = StrategyConfig("ie", k=3, rounds=10, zeta=0.2)
        assert choose_superarm(ie, 2, wc100, state, GREEDY, rng)[1]
        assert not choose_superarm(ie, 3, wc100, state, GREEDY, rng)[1]

    def test_strategic_prefers_unexplored(self):
        # node 0 has many untouched out-edges; node 5's edges are well explored
        edges = [(0, 1), (0, 2), (0, 3), (5, 6), (5, 7), (5, 8), (5, 9)]
        g = Graph.from_edges(10, edges, 0.0)
        state = state_with(np.zeros(7), [0, 0, 0, 100, 100, 100, 100])
        seeds, _ = choose_superarm(StrategyConfig("se", k=1), 1, g, state, GREEDY, np.random.default_rng(0))
        assert seeds.tolist() == [0]


class TestRunGame:
    def test_record_count_and_regret_definition(self, wc100):
        res = run_game(wc100, StrategyConfig("eg", k=3, rounds=15), OracleConfig(n_rr=2000), master_seed=2)
        assert len(res.records) == 15
        for r in res.records:
            assert r.regret == r.spread_true - r.spread_learned
            assert r.superarm_size == sum(int(wc100.out_degree[u]) for u in r.seeds)
        assert res.cumulative_avg_regret[-1] == pytest.approx(res.regret.mean())
        assert len(res.benchmark_seeds) == 3

    def test_empty_regret_sum(self, wc100):
        res = run_game(wc100, StrategyConfig("re", k=3, rounds=1), master_seed=0)
        res.records.clear()
        assert res.total_regret == 0.0

    def test_preloaded_deterministic_zero_regret(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (4, 5)], 1.0)
        state = EstimatorState.initial(g.n_edges)
        state.trigger_count[:] = 1
        state.success_count[:] = 1
        state.refresh()
        res = run_game(g, StrategyConfig("pe", k=1, rounds=20), GREEDY, master_seed=3, initial_state=state)
        assert all(r.regret == 0 for r in res.records)
        assert res.benchmark_seeds == (0,)

    def test_deterministic(self, wc100):
        cfg = StrategyConfig("eg", "nlf", k=3, rounds=20)
        a = run_game(wc100, cfg, OracleConfig(n_rr=2000), master_seed=5)
        b = run_game(wc100, cfg, OracleConfig(n_rr=2000), master_seed=5)
        assert pickle.dumps(a.records) == pickle.dumps(b.records)
        assert np.array_equal(a.state.mu_hat, b.state.mu_hat)

    def test_worlds_independent_of_feedback(self, wc100):
        digests = {
            fb: run_game(wc100, StrategyConfig("eg", fb, k=3, rounds=20), OracleConfig(n_rr=2000), master_seed=9).world_digests
            for fb in ("el", "nlf", "nlml")
        }
        assert digests["el"] == digests["nlf"] == digests["nlml"]

    def test_regret_trend_on_path(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)], [0.5, 0.5])
        improved = 0
        for seed in range(5):
            res = run_game(g, StrategyConfig("eg", k=1, rounds=200), OracleConfig(n_rr=2000), master_seed=seed)
            improved += res.window_mean_regret(181, 200) <= res.window_mean_regret(1, 20)
        assert improved >= 4

    def test_strategic_covers_more_edges(self, wc100):
        wins = 0
        for seed in range(5):
            se = run_game(wc100, StrategyConfig("se", k=5, rounds=100), OracleConfig(n_rr=2000), 100, seed)
            pe = run_game(wc100, StrategyConfig("pe", k=5, rounds=100), OracleConfig(n_rr=2000), 100, seed)
            wins += se.records[-1].edges_triggered >= pe.records[-1].edges_triggered
        assert wins >= 4

    def test_budget_above_nodes(self):
        g = Graph.from_edges(2, [(0, 1)], 0.5)
        with pytest.raises(BudgetError):
            run_game(g, StrategyConfig(k=3, rounds=2))


class TestInfluenceBandit:
    def test_params_roundtrip(self):
        est = InfluenceBandit(strategy="cucb", k=2, rounds=3)
        params = est.get_params()
        assert params["strategy"] == "cucb" and params["k"] == 2
        assert clone(est).get_params() == params

    def test_fit_predict(self, wc100):
        est = InfluenceBandit(strategy="eg", k=3, rounds=10, oracle="rr:2000", master_seed=1).fit(wc100)
        assert est.mu_hat_.shape == (wc100.n_edges,)
        assert len(est.result_.records) == 10
        seeds = est.predict()
        assert len(set(seeds.tolist())) == 3
        assert est.score() == -est.result_.regret.mean()

    def test_unfitted(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            InfluenceBandit().predict()

    def test_rejects_non_graph(self):
        with pytest.raises(TypeError):
            InfluenceBandit().fit(np.zeros((3, 3)))
