"""Command-line experiment runner and bound calculators.

``imbandit run`` plays the bandit game for one or more derived seeds and
writes a per-round CSV followed by a block of seed-averaged rows.
``imbandit bounds`` evaluates the closed-form bounds, and
``imbandit verify-sample-complexity`` runs the empirical cascade-count check.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from ._random import derive_seed
from .bandit import (
    FEEDBACK_ALIASES,
    STRATEGY_ALIASES,
    GameResult,
    StrategyConfig,
    check_sample_complexity,
    run_game,
)
from .feedback import MleConfig
from .graph import (
    Graph,
    assign_constant,
    assign_weighted_cascade,
    correlation_decay,
    read_edge_list,
    scale_probabilities,
)
from .metrics import failure_prob_bound, mle_loss_gap_bound, sample_complexity_bound
from .oracle import OracleConfig

__all__ = ["main", "build_parser", "CSV_COLUMNS", "ROC_PRECISIONS"]

CSV_COLUMNS = [
    "seed",
    "round",
    "algo",
    "feedback",
    "k",
    "spread_learned",
    "spread_true",
    "regret",
    "cum_avg_regret",
    "l2_rel_error",
    "frac_within_10",
]
ROC_PRECISIONS = tuple(range(5, 55, 5))
_NUMERIC = CSV_COLUMNS[5:]


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _parse_prior(text: Optional[str]):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError("--prior expects two numbers a,b")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"--prior expects two numbers, got {text!r}") from None


def load_graph(path: str, assign: str, scale: Optional[float] = None, remap: bool = False) -> Graph:
    """Read an edge list and apply the requested probability assignment."""
    g = read_edge_list(path, remap=remap)
    if assign == "wc":
        g = assign_weighted_cascade(g)
    elif assign.startswith("const:"):
        try:
            p = float(assign.partition(":")[2])
        except ValueError:
            raise ConfigError(f"bad constant probability in --assign {assign!r}") from None
        if not 0.0 <= p <= 1.0:
            raise ConfigError("constant probability must lie in [0, 1]")
        g = assign_constant(g, p)
    elif assign != "file":
        raise ConfigError(f"--assign must be wc, const:<p> or file, got {assign!r}")
    if scale is not None:
        g = scale_probabilities(g, scale)
    return g


def _precisions(roc: bool) -> tuple[float, ...]:
    extra = [p / 100 for p in ROC_PRECISIONS if p != 10] if roc else []
    return (0.1, *extra)


def _play(args) -> GameResult:
    g, strategy, oracle_cfg, mc_sims, seed, precisions = args
    return run_game(g, strategy, oracle_cfg, mc_sims, seed, precisions)


def _rows(results: Sequence[GameResult], strategy: StrategyConfig, algo: str, feedback: str, roc: bool):
    header = list(CSV_COLUMNS)
    extra = [p for p in ROC_PRECISIONS if p != 10] if roc else []
    header += [f"frac_within_{p}" for p in extra]

    table = []
    for idx, res in enumerate(results):
        cum = res.cumulative_avg_regret
        block = []
        for r, c in zip(res.records, cum):
            values = [r.spread_learned, r.spread_true, r.regret, c, r.l2_rel_error, r.frac_within[0.1]]
            values += [r.frac_within[p / 100] for p in extra]
            block.append(values)
        table.append(np.asarray(block, dtype=np.float64))

    rows = [header]
    for idx, block in enumerate(table):
        for s, values in enumerate(block, start=1):
            rows.append([str(idx), str(s), algo, feedback, str(strategy.k), *map(_fmt, values)])
    means = np.mean(np.stack(table), axis=0)
    for s, values in enumerate(means, start=1):
        rows.append(["mean", str(s), algo, feedback, str(strategy.k), *map(_fmt, values)])
    return rows


def run_experiment(args) -> int:
    try:
        algo = STRATEGY_ALIASES[args.algo]
        feedback = FEEDBACK_ALIASES[args.feedback]
        strategy = StrategyConfig(
            kind=algo,
            feedback=feedback,
            k=args.k,
            rounds=args.rounds,
            omega=args.omega,
            zeta=args.zeta,
            prior=_parse_prior(args.prior),
            mle=MleConfig(eta0=args.eta0),
        )
        oracle_cfg = OracleConfig.parse(args.oracle)
        if args.seeds < 1:
            raise ConfigError("--seeds must be at least 1")
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        g = load_graph(args.graph, args.assign, args.scale, args.remap)
        if strategy.k > g.n_nodes:
            raise ConfigError(f"--k {strategy.k} exceeds the graph's {g.n_nodes} nodes")
    except OSError as exc:
        print(f"imbandit: cannot read graph: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"imbandit: invalid configuration: {exc}", file=sys.stderr)
        return 2

    precisions = _precisions(args.roc)
    jobs = [
        (g, strategy, oracle_cfg, args.mc_sims, derive_seed(args.master_seed, i), precisions)
        for i in range(args.seeds)
    ]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_play, jobs))
    else:
        results = [_play(j) for j in jobs]

    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(_rows(results, strategy, args.algo, args.feedback, args.roc))
    try:
        if args.out in (None, "-"):
            sys.stdout.write(buf.getvalue())
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
    except OSError as exc:
        print(f"imbandit: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


def run_bounds(args) -> int:
    try:
        if args.bound == "failure-prob":
            value = failure_prob_bound(args.k, args.pmin, args.pmax)
        elif args.bound == "sample-complexity":
            value = sample_complexity_bound(args.gamma, args.nodes, args.k, args.pstar, args.eps, args.delta)
        else:
            value = mle_loss_gap_bound(args.dv, args.thetamax, args.T, args.G)
    except ValueError as exc:
        print(f"imbandit: {exc}", file=sys.stderr)
        return 2
    print(format(value, ".6g"))
    return 0


def run_sample_check(args) -> int:
    try:
        g = load_graph(args.graph, args.assign, None, args.remap)
        scale = args.scale
        if scale is None:
            # pick the factor that brings the largest incoming sum to 1 - gamma
            insum = np.bincount(g.dst, weights=g.true_prob, minlength=g.n_nodes).max()
            scale = min(1.0, (1.0 - args.gamma) / insum) if insum > 0 else 1.0
        g = scale_probabilities(g, scale)
        correlation_decay(g)
        check = check_sample_complexity(g, args.k, args.eps, args.delta, args.reps, args.master_seed)
    except OSError as exc:
        print(f"imbandit: cannot read graph: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"imbandit: invalid configuration: {exc}", file=sys.stderr)
        return 2
    u, v = int(g.src[check.edge]), int(g.dst[check.edge])
    print(f"gamma {check.gamma:.6g}")
    print(f"edge {u} {v} p {check.p_star:.6g}")
    print(f"cascades {check.cascades}")
    print(f"success {check.successes}/{check.repetitions} ({check.success_rate:.6g})")
    print(f"required {1 - args.delta:.6g}")
    return 0 if check.success_rate >= 1 - args.delta else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imbandit", description="Influence maximization bandit experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play the bandit game and write a per-round CSV")
    run.add_argument("--graph", required=True, help="edge list: 'u v' or 'u v p' per line")
    run.add_argument("--assign", default="wc", help="wc, const:<p> or file (default wc)")
    run.add_argument("--scale", type=float, default=None, help="multiply probabilities by this factor")
    run.add_argument("--remap", action="store_true", help="compact sparse node ids")
    run.add_argument("--algo", choices=sorted(STRATEGY_ALIASES), default="eg")
    run.add_argument("--feedback", choices=sorted(FEEDBACK_ALIASES), default="el")
    run.add_argument("--k", type=int, default=5)
    run.add_argument("--rounds", type=int, default=100)
    run.add_argument("--omega", type=float, default=5.0)
    run.add_argument("--zeta", type=float, default=0.2)
    run.add_argument("--prior", default=None, help="Beta prior a,b")
    run.add_argument("--oracle", default="rr:10000", help="greedy:<sims> or rr:<n>")
    run.add_argument("--mc-sims", type=int, default=200, help="worlds for strategic exploration's value spread")
    run.add_argument("--eta0", type=float, default=1.0, help="online MLE base step size")
    run.add_argument("--seeds", type=int, default=1, help="number of independent runs")
    run.add_argument("--master-seed", type=int, default=0)
    run.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    run.add_argument("--roc", action="store_true", help="add frac_within columns for 5%%..50%%")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run.set_defaults(handler=run_experiment)

    bounds = sub.add_parser("bounds", help="evaluate a closed-form bound")
    bsub = bounds.add_subparsers(dest="bound", required=True)
    fp = bsub.add_parser("failure-prob", help="credit-assignment failure probability bound")
    fp.add_argument("--k", type=int, required=True, help="number of simultaneously active parents")
    fp.add_argument("--pmin", type=float, required=True)
    fp.add_argument("--pmax", type=float, required=True)
    sc = bsub.add_parser("sample-complexity", help="cascades needed under random exploration")
    sc.add_argument("--gamma", type=float, required=True)
    sc.add_argument("--nodes", type=int, required=True)
    sc.add_argument("--k", type=int, required=True)
    sc.add_argument("--delta", type=float, required=True)
    sc.add_argument("--eps", type=float, required=True)
    sc.add_argument("--pstar", type=float, required=True)
    mg = bsub.add_parser("mle-gap", help="online vs batch likelihood gap bound")
    mg.add_argument("--dv", type=float, required=True)
    mg.add_argument("--thetamax", type=float, required=True)
    mg.add_argument("--T", type=int, required=True)
    mg.add_argument("--G", type=float, required=True)
    bounds.set_defaults(handler=run_bounds)

    vs = sub.add_parser("verify-sample-complexity", help="empirical check of the cascade-count bound")
    vs.add_argument("--graph", required=True)
    vs.add_argument("--assign", default="wc")
    vs.add_argument("--remap", action="store_true")
    vs.add_argument("--scale", type=float, default=None, help="default: scale so gamma equals --gamma")
    vs.add_argument("--gamma", type=float, default=0.5)
    vs.add_argument("--k", type=int, default=5)
    vs.add_argument("--eps", type=float, default=0.25)
    vs.add_argument("--delta", type=float, default=0.1)
    vs.add_argument("--reps", type=int, default=50)
    vs.add_argument("--master-seed", type=int, default=0)
    vs.set_defaults(handler=run_sample_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
