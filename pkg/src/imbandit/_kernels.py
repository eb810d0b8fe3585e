"""Compiled inner loops for diffusion and seed selection.

All kernels take CSR arrays from :class:`~imbandit.graph.Graph` and, where
random, a ``numpy.random.Generator`` that they advance in place. They run
serially, so a given generator state always produces the same output.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def cascade_times(n, out_indptr, out_edges, dst, live, seeds):
    """BFS over live edges; returns activation step per node (-1 = inactive)."""
    times = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for s in seeds:
        if times[s] < 0:
            times[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for j in range(out_indptr[u], out_indptr[u + 1]):
            e = out_edges[j]
            v = dst[e]
            if live[e] and times[v] < 0:
                times[v] = times[u] + 1
                queue[tail] = v
                tail += 1
    return times


@njit(cache=True)
def mc_spread_total(n, out_indptr, out_edges, dst, probs, seeds, n_sims, rng):
    """Sum of activated-node counts over ``n_sims`` lazily sampled cascades."""
    stamp = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    total = 0
    for sim in range(1, n_sims + 1):
        head = 0
        tail = 0
        for s in seeds:
            if stamp[s] != sim:
                stamp[s] = sim
                queue[tail] = s
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for j in range(out_indptr[u], out_indptr[u + 1]):
                e = out_edges[j]
                v = dst[e]
                if stamp[v] != sim and rng.random() < probs[e]:
                    stamp[v] = sim
                    queue[tail] = v
                    tail += 1
        total += tail
    return total


@njit(cache=True)
def mc_value_total(n, out_indptr, out_edges, dst, probs, seeds, values, n_sims, rng):
    """Like :func:`mc_spread_total` but sums node values instead of counts."""
    stamp = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    total = 0.0
    for sim in range(1, n_sims + 1):
        head = 0
        tail = 0
        for s in seeds:
            if stamp[s] != sim:
                stamp[s] = sim
                queue[tail] = s
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for j in range(out_indptr[u], out_indptr[u + 1]):
                e = out_edges[j]
                v = dst[e]
                if stamp[v] != sim and rng.random() < probs[e]:
                    stamp[v] = sim
                    queue[tail] = v
                    tail += 1
        for i in range(tail):
            total += values[queue[i]]
    return total


@njit(cache=True)
def greedy_common_worlds(n, out_indptr, out_edges, dst, live, values, k, allowed):
    """Greedy value-coverage over a fixed batch of sampled worlds.

    ``live`` has shape (n_worlds, n_edges). ``covered[w, x]`` marks nodes
    already reached by the chosen seeds in world ``w``; a candidate's gain is
    the summed value of newly reachable nodes, averaged over worlds. The
    covered set of a world is closed under reachability, so BFS stops at
    covered nodes. Ties go to the lowest node id.
    """
    n_worlds = live.shape[0]
    covered = np.zeros((n_worlds, n), dtype=np.bool_)
    chosen = np.zeros(n, dtype=np.bool_)
    selected = np.empty(k, dtype=np.int64)
    gains = np.empty(k, dtype=np.float64)
    stamp = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    tick = 0
    for it in range(k):
        best = -1
        best_gain = -1.0
        for u in range(n):
            if chosen[u] or not allowed[u]:
                continue
            gain = 0.0
            for w in range(n_worlds):
                if covered[w, u]:
                    continue
                tick += 1
                stamp[u] = tick
                queue[0] = u
                head = 0
                tail = 1
                while head < tail:
                    x = queue[head]
                    head += 1
                    gain += values[x]
                    for j in range(out_indptr[x], out_indptr[x + 1]):
                        e = out_edges[j]
                        y = dst[e]
                        if live[w, e] and stamp[y] != tick and not covered[w, y]:
                            stamp[y] = tick
                            queue[tail] = y
                            tail += 1
            if gain > best_gain:
                best_gain = gain
                best = u
        if best < 0:
            return selected[:it], gains[:it]
        chosen[best] = True
        selected[it] = best
        gains[it] = best_gain / n_worlds
        for w in range(n_worlds):
            if covered[w, best]:
                continue
            covered[w, best] = True
            queue[0] = best
            head = 0
            tail = 1
            while head < tail:
                x = queue[head]
                head += 1
                for j in range(out_indptr[x], out_indptr[x + 1]):
                    e = out_edges[j]
                    y = dst[e]
                    if live[w, e] and not covered[w, y]:
                        covered[w, y] = True
                        queue[tail] = y
                        tail += 1
    return selected, gains


@njit(cache=True)
def rr_sets(n, in_indptr, in_edges, src, probs, n_rr, rng, fixed_root):
    """Generate ``n_rr`` reverse-reachable sets with lazy edge sampling.

    Roots are uniform over nodes unless ``fixed_root >= 0``. Returns CSR
    ``(indptr, members, roots)``; each set lists its root first.
    """
    roots = np.empty(n_rr, dtype=np.int64)
    indptr = np.zeros(n_rr + 1, dtype=np.int64)
    cap = max(16, 2 * n_rr)
    members = np.empty(cap, dtype=np.int64)
    stamp = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    size = 0
    for r in range(n_rr):
        if fixed_root >= 0:
            root = fixed_root
        else:
            root = rng.integers(0, n)
        roots[r] = root
        tick = r + 1
        stamp[root] = tick
        queue[0] = root
        head = 0
        tail = 1
        while head < tail:
            x = queue[head]
            head += 1
            for j in range(in_indptr[x], in_indptr[x + 1]):
                e = in_edges[j]
                u = src[e]
                if stamp[u] != tick and rng.random() < probs[e]:
                    stamp[u] = tick
                    queue[tail] = u
                    tail += 1
        if size + tail > cap:
            while size + tail > cap:
                cap *= 2
            grown = np.empty(cap, dtype=np.int64)
            grown[:size] = members[:size]
            members = grown
        members[size : size + tail] = queue[:tail]
        size += tail
        indptr[r + 1] = size
    return indptr, members[:size].copy(), roots


@njit(cache=True)
def max_cover(n, indptr, members, k):
    """Greedy maximum coverage of a set family; ties to the lowest node id."""
    n_sets = indptr.shape[0] - 1
    counts = np.zeros(n, dtype=np.int64)
    for i in range(members.shape[0]):
        counts[members[i]] += 1
    # node -> sets incidence (CSR)
    node_ptr = np.zeros(n + 1, dtype=np.int64)
    for x in range(n):
        node_ptr[x + 1] = node_ptr[x] + counts[x]
    fill = node_ptr[:-1].copy()
    node_sets = np.empty(members.shape[0], dtype=np.int64)
    for s in range(n_sets):
        for i in range(indptr[s], indptr[s + 1]):
            x = members[i]
            node_sets[fill[x]] = s
            fill[x] += 1
    done = np.zeros(n_sets, dtype=np.bool_)
    chosen = np.zeros(n, dtype=np.bool_)
    selected = np.empty(k, dtype=np.int64)
    newly = np.empty(k, dtype=np.int64)
    for it in range(k):
        best = -1
        best_count = -1
        for x in range(n):
            if not chosen[x] and counts[x] > best_count:
                best_count = counts[x]
                best = x
        chosen[best] = True
        selected[it] = best
        newly[it] = best_count
        for i in range(node_ptr[best], node_ptr[best + 1]):
            s = node_sets[i]
            if done[s]:
                continue
            done[s] = True
            for j in range(indptr[s], indptr[s + 1]):
                counts[members[j]] -= 1
    return selected, newly


@njit(cache=True)
def enumerate_spread(n, out_indptr, out_edges, dst, probs, seeds):
    """Exact expected spread by summing over all 2^m possible worlds."""
    m = probs.shape[0]
    live = np.zeros(m, dtype=np.bool_)
    seen = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    total = 0.0
    for mask in range(1 << m):
        p = 1.0
        for e in range(m):
            if (mask >> e) & 1:
                live[e] = True
                p *= probs[e]
            else:
                live[e] = False
                p *= 1.0 - probs[e]
        if p == 0.0:
            continue
        tick = mask + 1
        head = 0
        tail = 0
        for s in seeds:
            if seen[s] != tick:
                seen[s] = tick
                queue[tail] = s
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for j in range(out_indptr[u], out_indptr[u + 1]):
                e = out_edges[j]
                v = dst[e]
                if live[e] and seen[v] != tick:
                    seen[v] = tick
                    queue[tail] = v
                    tail += 1
        total += p * tail
    return total
