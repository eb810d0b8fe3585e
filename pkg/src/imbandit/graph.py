"""Directed influence graphs.

A :class:`Graph` is an immutable edge table plus CSR adjacency in both
directions. Edge ids are dense (``0 .. n_edges - 1``) and follow file order;
each edge is one base arm of the bandit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .exceptions import (
    DuplicateEdgeError,
    EdgeListParseError,
    NoCorrelationDecayError,
    ProbabilityRangeError,
)

__all__ = [
    "Graph",
    "load_edge_list",
    "read_edge_list",
    "dump_edge_list",
    "assign_weighted_cascade",
    "assign_constant",
    "scale_probabilities",
    "correlation_decay",
    "random_graph",
]


def _csr(keys: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # stable sort keeps edge-id order inside each row
    order = np.argsort(keys, kind="stable").astype(np.int64)
    counts = np.bincount(keys, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, order


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Directed graph with a true influence probability on every edge.

    Attributes
    ----------
    n_nodes : int
    src, dst : ndarray of int64, shape (n_edges,)
    true_prob : ndarray of float64, shape (n_edges,)
    out_indptr, out_edges : CSR rows of out-edge ids per node
    in_indptr, in_edges : CSR rows of in-edge ids per node
    node_labels : optional original ids when the input was remapped
    """

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    true_prob: np.ndarray
    out_indptr: np.ndarray = field(repr=False)
    out_edges: np.ndarray = field(repr=False)
    in_indptr: np.ndarray = field(repr=False)
    in_edges: np.ndarray = field(repr=False)
    node_labels: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_edges(
        cls,
        n_nodes: int,
        edges: Iterable[tuple[int, int]],
        probs: Union[None, float, Sequence[float], np.ndarray] = None,
        node_labels: Optional[Sequence[int]] = None,
    ) -> "Graph":
        """Build a graph, checking ids, self-loops, duplicates and probabilities."""
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        n_nodes = int(n_nodes)
        if n_nodes < 0:
            raise ValueError("n_nodes must be non-negative")
        src = np.ascontiguousarray(pairs[:, 0])
        dst = np.ascontiguousarray(pairs[:, 1])
        if len(src) and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n_nodes):
            raise ValueError("edge endpoint outside [0, n_nodes)")
        if np.any(src == dst):
            raise ValueError("self-loops are not allowed")
        if len(src):
            key = src * n_nodes + dst
            if np.unique(key).size != key.size:
                raise DuplicateEdgeError("duplicate (source, target) pair")
        if probs is None:
            p = np.zeros(len(src))
        elif np.isscalar(probs):
            p = np.full(len(src), float(probs))
        else:
            p = np.array(probs, dtype=np.float64)
            if p.shape != src.shape:
                raise ValueError("probs must have one entry per edge")
        if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
            raise ProbabilityRangeError("probabilities must lie in [0, 1]")
        out_indptr, out_edges = _csr(src, n_nodes)
        in_indptr, in_edges = _csr(dst, n_nodes)
        labels = None if node_labels is None else _frozen(np.asarray(node_labels, dtype=np.int64))
        return cls(
            n_nodes=n_nodes,
            src=_frozen(src),
            dst=_frozen(dst),
            true_prob=_frozen(p.astype(np.float64)),
            out_indptr=_frozen(out_indptr),
            out_edges=_frozen(out_edges),
            in_indptr=_frozen(in_indptr),
            in_edges=_frozen(in_edges),
            node_labels=labels,
        )

    @property
    def n_edges(self) -> int:
        return int(self.src.shape[0])

    def out_edge_ids(self, u: int) -> np.ndarray:
        return self.out_edges[self.out_indptr[u] : self.out_indptr[u + 1]]

    def in_edge_ids(self, v: int) -> np.ndarray:
        return self.in_edges[self.in_indptr[v] : self.in_indptr[v + 1]]

    @cached_property
    def in_degree(self) -> np.ndarray:
        return _frozen(np.diff(self.in_indptr))

    @cached_property
    def out_degree(self) -> np.ndarray:
        return _frozen(np.diff(self.out_indptr))

    @cached_property
    def _edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(zip(self.src, self.dst))}

    def edge_id(self, u: int, v: int) -> int:
        """Edge id of ``(u, v)``; raises ``KeyError`` if absent."""
        return self._edge_index[(int(u), int(v))]

    def with_probabilities(self, probs: Union[float, Sequence[float], np.ndarray]) -> "Graph":
        """Copy of the graph with new true probabilities (adjacency is shared)."""
        if np.isscalar(probs):
            p = np.full(self.n_edges, float(probs))
        else:
            p = np.array(probs, dtype=np.float64)
        if p.shape != (self.n_edges,):
            raise ValueError("probs must have one entry per edge")
        if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
            raise ProbabilityRangeError("probabilities must lie in [0, 1]")
        return Graph(
            n_nodes=self.n_nodes,
            src=self.src,
            dst=self.dst,
            true_prob=_frozen(p),
            out_indptr=self.out_indptr,
            out_edges=self.out_edges,
            in_indptr=self.in_indptr,
            in_edges=self.in_edges,
            node_labels=self.node_labels,
        )


def load_edge_list(
    text: Union[str, TextIO],
    default_prob: Optional[float] = None,
    remap: bool = False,
) -> Graph:
    """Parse ``u v`` / ``u v p`` lines into a :class:`Graph`.

    Blank lines and ``#`` comments are skipped. Edges without a probability get
    ``default_prob`` (or 0 when it is ``None``, pending assignment). Without
    ``remap`` the node count is ``1 + max id``; with it, ids are compacted to
    ``0..n-1`` in ascending order and the originals kept in ``node_labels``.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    if default_prob is not None and not 0.0 <= default_prob <= 1.0:
        raise ProbabilityRangeError("default_prob must lie in [0, 1]")

    edges: list[tuple[int, int]] = []
    probs: list[float] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(f"expected 'u v' or 'u v p', got {raw.strip()!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(f"node ids must be integers, got {raw.strip()!r}", lineno) from None
        if u < 0 or v < 0:
            raise EdgeListParseError("node ids must be non-negative", lineno)
        if u == v:
            raise EdgeListParseError(f"self-loop on node {u}", lineno)
        if len(parts) == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise EdgeListParseError(f"bad probability {parts[2]!r}", lineno) from None
            if not (0.0 <= p <= 1.0):
                raise ProbabilityRangeError(f"probability {p!r} outside [0, 1]", lineno)
        else:
            p = 0.0 if default_prob is None else float(default_prob)
        if (u, v) in seen:
            raise DuplicateEdgeError(f"duplicate edge {u} {v}", lineno)
        seen.add((u, v))
        edges.append((u, v))
        probs.append(p)

    if not edges:
        return Graph.from_edges(0, [], [])
    if remap:
        labels = np.unique(np.asarray(edges, dtype=np.int64))
        lookup = {int(x): i for i, x in enumerate(labels)}
        dense = [(lookup[u], lookup[v]) for u, v in edges]
        return Graph.from_edges(len(labels), dense, probs, node_labels=labels)
    n = 1 + max(max(u, v) for u, v in edges)
    return Graph.from_edges(n, edges, probs)


def read_edge_list(path, default_prob: Optional[float] = None, remap: bool = False) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, default_prob=default_prob, remap=remap)


def dump_edge_list(g: Graph) -> str:
    """Serialize as ``u v p`` lines; ``repr`` keeps floats bit-exact."""
    labels = g.node_labels
    lines = []
    for u, v, p in zip(g.src.tolist(), g.dst.tolist(), g.true_prob.tolist()):
        if labels is not None:
            u, v = int(labels[u]), int(labels[v])
        lines.append(f"{u} {v} {p!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def assign_weighted_cascade(g: Graph) -> Graph:
    """Set ``p(u, v) = 1 / in_degree(v)`` on every edge."""
    deg = g.in_degree[g.dst].astype(np.float64)
    return g.with_probabilities(1.0 / deg)


def assign_constant(g: Graph, p: float) -> Graph:
    return g.with_probabilities(float(p))


def scale_probabilities(g: Graph, factor: float) -> Graph:
    """Multiply every true probability by ``factor`` in (0, 1]."""
    if not 0.0 < factor <= 1.0:
        raise ValueError("factor must lie in (0, 1]")
    return g.with_probabilities(g.true_prob * factor)


def correlation_decay(g: Graph, probs: Optional[np.ndarray] = None) -> float:
    """Return ``1 - max_v sum_{(u,v)} p(u,v)``.

    Raises :class:`NoCorrelationDecayError` when some node's incoming sum is
    at least 1 (within 1e-12), since the bound is then vacuous.
    """
    p = g.true_prob if probs is None else np.asarray(probs, dtype=np.float64)
    if g.n_edges == 0:
        return 1.0
    insum = np.bincount(g.dst, weights=p, minlength=g.n_nodes)
    worst = float(insum.max())
    if worst >= 1.0 - 1e-12:
        raise NoCorrelationDecayError(
            f"max incoming probability sum is {worst:.6g}; correlation decay needs it below 1"
        )
    return 1.0 - worst


def random_graph(
    n_nodes: int,
    avg_out_degree: float,
    random_state=None,
    hub_bias: float = 1.0,
) -> Graph:
    """Random directed graph with preferential out-degree.

    Each edge picks its source with weight ``(out_degree + hub_bias)`` and a
    uniform target, giving a heavy-tailed out-degree when ``hub_bias`` is
    small. Probabilities are left at 0; assign them afterwards.
    """
    rng = np.random.default_rng(random_state)
    n_nodes = int(n_nodes)
    target = int(round(avg_out_degree * n_nodes))
    max_edges = n_nodes * (n_nodes - 1)
    target = min(target, max_edges)
    weights = np.full(n_nodes, float(hub_bias))
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    attempts = 0
    while len(edges) < target and attempts < 50 * max(target, 1):
        attempts += 1
        u = int(rng.choice(n_nodes, p=weights / weights.sum()))
        v = int(rng.integers(n_nodes))
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        edges.append((u, v))
        weights[u] += 1.0
    return Graph.from_edges(n_nodes, edges)
