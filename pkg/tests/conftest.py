import itertools
from collections import deque

import numpy as np
import pytest

from imbandit import Graph


def reach(n, edges, live, seeds):
    """Nodes reachable from ``seeds`` over edges flagged live (plain BFS)."""
    adj = [[] for _ in range(n)]
    for (u, v), ok in zip(edges, live):
        if ok:
            adj[u].append(v)
    seen = set(seeds)
    queue = deque(seeds)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def brute_spread(n, edges, probs, seeds):
    """Expected reachable count by summing over every possible world."""
    seeds = list(seeds)
    if not seeds:
        return 0.0
    total = 0.0
    for live in itertools.product((False, True), repeat=len(edges)):
        w = 1.0
        for ok, p in zip(live, probs):
            w *= p if ok else 1.0 - p
        if w:
            total += w * len(reach(n, edges, live, seeds))
    return total


def random_small_graph(rng, n_max=6, m_max=10, m_min=0):
    n = int(rng.integers(2, n_max + 1))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    m = int(rng.integers(min(m_min, len(pairs)), min(m_max, len(pairs)) + 1))
    idx = rng.choice(len(pairs), size=m, replace=False)
    edges = [pairs[i] for i in sorted(idx)]
    probs = rng.uniform(0.05, 0.95, size=m)
    return Graph.from_edges(n, edges, probs)


@pytest.fixture
def chain():
    return Graph.from_edges(3, [(0, 1), (1, 2)], [1.0, 1.0])


@pytest.fixture
def diamond():
    return Graph.from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)], [1.0, 1.0, 1.0, 1.0])
