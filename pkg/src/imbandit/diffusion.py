"""Independent-cascade diffusion: possible worlds, cascades and spread."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np

from . import _kernels
from ._random import RandomLike, check_rng
from .exceptions import TooManyEdgesError
from .graph import Graph
from .validation import check_probabilities, check_seed_set

__all__ = [
    "PossibleWorld",
    "Cascade",
    "sample_world",
    "simulate_cascade",
    "estimate_spread_mc",
    "estimate_value_spread_mc",
    "exact_spread",
    "exact_spread_function",
    "dump_cascade",
    "MAX_ENUMERATION_EDGES",
]

MAX_ENUMERATION_EDGES = 25


@dataclass(frozen=True, eq=False)
class PossibleWorld:
    """Live/dead status of every edge."""

    live: np.ndarray

    def __len__(self) -> int:
        return int(self.live.shape[0])


@dataclass(frozen=True, eq=False)
class Cascade:
    """One round's diffusion record.

    ``activation_time[v]`` is the step at which ``v`` became active (-1 when
    it never did). ``attempted[e]`` is true iff the source of ``e`` became
    active. ``live_status`` is the ground truth for attempted edges and is
    only for edge-level feedback; node-level code must work from
    :meth:`node_view`, which drops it.
    """

    graph: Graph
    seeds: np.ndarray
    activation_time: np.ndarray
    attempted: np.ndarray
    live_status: Optional[np.ndarray]

    @property
    def active(self) -> np.ndarray:
        return self.activation_time >= 0

    @property
    def spread(self) -> int:
        return int(np.count_nonzero(self.activation_time >= 0))

    @property
    def horizon(self) -> int:
        """Step at which the last round of attempts happens (max time + 1)."""
        if not np.any(self.activation_time >= 0):
            return 0
        return int(self.activation_time.max()) + 1

    def node_view(self) -> "Cascade":
        """Copy without edge statuses: what node-level feedback may observe."""
        return replace(self, live_status=None)


def sample_world(g: Graph, random_state: RandomLike = None, probs: Optional[np.ndarray] = None) -> PossibleWorld:
    """Draw every edge live independently with its probability."""
    rng = check_rng(random_state)
    p = g.true_prob if probs is None else check_probabilities(probs, g)
    live = rng.random(g.n_edges) < p
    return PossibleWorld(live=live)


def simulate_cascade(g: Graph, world: PossibleWorld, seeds: Iterable[int]) -> Cascade:
    """Run IC on a fixed world; activation times are BFS distances from the seeds."""
    seeds = check_seed_set(seeds, g)
    live = np.asarray(world.live, dtype=np.bool_)
    if live.shape != (g.n_edges,):
        raise ValueError("world does not match the graph's edge count")
    times = _kernels.cascade_times(g.n_nodes, g.out_indptr, g.out_edges, g.dst, live, seeds)
    attempted = times[g.src] >= 0
    return Cascade(
        graph=g,
        seeds=seeds,
        activation_time=times,
        attempted=attempted,
        live_status=live & attempted,
    )


def estimate_spread_mc(
    g: Graph,
    probs: Optional[np.ndarray],
    seeds: Iterable[int],
    n_sims: int,
    random_state: RandomLike = None,
) -> float:
    """Mean active-node count over ``n_sims`` simulated cascades under ``probs``."""
    if n_sims < 1:
        raise ValueError("n_sims must be at least 1")
    p = g.true_prob if probs is None else check_probabilities(probs, g)
    seeds = check_seed_set(seeds, g)
    if seeds.size == 0:
        return 0.0
    rng = check_rng(random_state)
    total = _kernels.mc_spread_total(g.n_nodes, g.out_indptr, g.out_edges, g.dst, p, seeds, int(n_sims), rng)
    return total / n_sims


def estimate_value_spread_mc(
    g: Graph,
    probs: Optional[np.ndarray],
    seeds: Iterable[int],
    values: np.ndarray,
    n_sims: int,
    random_state: RandomLike = None,
) -> float:
    """Expected summed value of activated nodes."""
    if n_sims < 1:
        raise ValueError("n_sims must be at least 1")
    p = g.true_prob if probs is None else check_probabilities(probs, g)
    seeds = check_seed_set(seeds, g)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if seeds.size == 0:
        return 0.0
    rng = check_rng(random_state)
    total = _kernels.mc_value_total(
        g.n_nodes, g.out_indptr, g.out_edges, g.dst, p, seeds, values, int(n_sims), rng
    )
    return total / n_sims


def exact_spread(
    g: Graph,
    probs: Optional[np.ndarray],
    seeds: Iterable[int],
    method: str = "enumerate",
) -> float:
    """Exact expected spread.

    ``method="enumerate"`` sums over all ``2**n_edges`` worlds and refuses
    graphs with more than ``MAX_ENUMERATION_EDGES`` edges.
    ``method="frontier"`` walks the distribution of (active set, newly active
    set) states instead; it scales with node count rather than edge count.
    """
    p = g.true_prob if probs is None else check_probabilities(probs, g)
    seeds = check_seed_set(seeds, g)
    if seeds.size == 0:
        return 0.0
    if method == "enumerate":
        if g.n_edges > MAX_ENUMERATION_EDGES:
            raise TooManyEdgesError(
                f"{g.n_edges} edges; world enumeration is capped at {MAX_ENUMERATION_EDGES}"
            )
        return float(_kernels.enumerate_spread(g.n_nodes, g.out_indptr, g.out_edges, g.dst, p, seeds))
    if method == "frontier":
        return exact_spread_function(g, p)(seeds)
    raise ValueError(f"unknown method {method!r}")


def exact_spread_function(
    g: Graph, probs: Optional[np.ndarray] = None, max_nodes: int = 20
) -> Callable[[Iterable[int]], float]:
    """Return ``seeds -> exact spread`` sharing one memo across calls.

    In IC, the nodes activated in the next step depend only on the current
    active set ``A`` and the newly active frontier ``F``; each inactive
    target ``w`` joins independently with probability
    ``1 - prod_{u in F} (1 - p(u, w))``. The expected number of further
    activations from ``(A, F)`` is therefore a function of the pair and is
    memoised as such, so many seed sets on one graph reuse the same table.
    """
    if g.n_nodes > max_nodes:
        raise TooManyEdgesError(f"{g.n_nodes} nodes; frontier recursion is capped at {max_nodes}")
    p = g.true_prob if probs is None else check_probabilities(probs, g)
    out = [
        [(int(g.dst[e]), float(p[e])) for e in g.out_edge_ids(u) if p[e] > 0.0]
        for u in range(g.n_nodes)
    ]
    memo: dict[tuple[int, int], float] = {}

    def further(active: int, frontier: int) -> float:
        key = (active, frontier)
        hit = memo.get(key)
        if hit is not None:
            return hit
        fail: dict[int, float] = {}
        f = frontier
        while f:
            low = f & -f
            u = low.bit_length() - 1
            f ^= low
            for w, pw in out[u]:
                if not (active >> w) & 1:
                    fail[w] = fail.get(w, 1.0) * (1.0 - pw)
        cands = [(w, 1.0 - q) for w, q in sorted(fail.items()) if q < 1.0]
        total = 0.0
        for subset in range(1, 1 << len(cands)):
            prob = 1.0
            new = 0
            count = 0
            for j, (w, q) in enumerate(cands):
                if (subset >> j) & 1:
                    prob *= q
                    new |= 1 << w
                    count += 1
                else:
                    prob *= 1.0 - q
            if prob > 0.0:
                total += prob * (count + further(active | new, new))
        memo[key] = total
        return total

    def spread(seeds: Iterable[int]) -> float:
        s = check_seed_set(seeds, g)
        if s.size == 0:
            return 0.0
        mask = 0
        for x in s.tolist():
            mask |= 1 << x
        return len(s) + further(mask, mask)

    return spread


def dump_cascade(cascade: Cascade, edge_level: bool = False) -> str:
    """Debug text: ``node time`` lines, then ``u v live|dead`` for attempted edges."""
    g = cascade.graph
    lines = [f"{v} {t}" for v, t in enumerate(cascade.activation_time.tolist()) if t >= 0]
    if edge_level:
        if cascade.live_status is None:
            raise ValueError("cascade has no edge statuses (node-level view)")
        for e in np.flatnonzero(cascade.attempted).tolist():
            status = "live" if cascade.live_status[e] else "dead"
            lines.append(f"{int(g.src[e])} {int(g.dst[e])} {status}")
    return "\n".join(lines) + "\n"
