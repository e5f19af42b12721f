"""Weighted undirected graphs and leader/follower role assignments.

Node ids are 1-based everywhere in the public interface. Arrays indexed by
node (states, distances) use position ``i - 1`` for node ``i``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdge,
    EmptyLeaderSet,
    FormatError,
    NodeIdOutOfRange,
    NonPositiveWeight,
    SelfLoop,
)

__all__ = [
    "WeightedGraph",
    "RoleAssignment",
    "build_graph",
    "neighbors",
    "validate_connected",
    "assign_roles",
    "parse_edge_list",
    "format_edge_list",
    "random_connected_graph",
    "random_leaders",
]


@dataclass(frozen=True)
class WeightedGraph:
    """Immutable undirected graph with strictly positive edge weights.

    ``adjacency[i - 1]`` holds the ``(neighbor, weight)`` pairs of node ``i``
    sorted by neighbor id. Build instances with :func:`build_graph`.
    """

    node_count: int
    adjacency: tuple[tuple[tuple[int, float], ...], ...]

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int, float]]:
        """Each undirected edge once, as ``(i, j, w)`` with ``i < j``."""
        return [
            (i, j, w)
            for i, adj in enumerate(self.adjacency, start=1)
            for j, w in adj
            if i < j
        ]

    @cached_property
    def max_weight(self) -> float:
        return max((w for adj in self.adjacency for _, w in adj), default=0.0)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Compressed adjacency ``(starts, index, weight)`` for vectorized sweeps.

        ``index`` holds 0-based neighbor positions; node ``i``'s neighbors
        occupy ``starts[i - 1]`` up to the next start.
        """
        deg = np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.node_count)
        starts = np.concatenate(([0], np.cumsum(deg)[:-1]))
        index = np.fromiter(
            (j - 1 for adj in self.adjacency for j, _ in adj), dtype=np.int64, count=int(deg.sum())
        )
        weight = np.fromiter(
            (w for adj in self.adjacency for _, w in adj), dtype=float, count=int(deg.sum())
        )
        for arr in (starts, index, weight):
            arr.setflags(write=False)
        return starts, index, weight

    @cached_property
    def isolated(self) -> np.ndarray:
        return np.array([not a for a in self.adjacency], dtype=bool)

    def check_node(self, i: int) -> None:
        if not (isinstance(i, (int, np.integer)) and 1 <= i <= self.node_count):
            raise NodeIdOutOfRange(f"node id {i!r} not in 1..{self.node_count}")


@dataclass(frozen=True)
class RoleAssignment:
    """Partition of the nodes into static leaders and dynamic followers."""

    leaders: frozenset[int]
    followers: frozenset[int]

    @cached_property
    def leader_mask(self) -> np.ndarray:
        n = len(self.leaders) + len(self.followers)
        mask = np.zeros(n, dtype=bool)
        mask[[i - 1 for i in self.leaders]] = True
        mask.setflags(write=False)
        return mask


def build_graph(n: int, edges: Iterable[tuple[int, int, float]]) -> WeightedGraph:
    """Validate an edge list and return the canonical graph.

    Two edge lists describing the same edge set (in any order or
    orientation) produce equal graphs.
    """
    if n < 1:
        raise NodeIdOutOfRange(f"node count must be positive, got {n}")
    adj: list[dict[int, float]] = [{} for _ in range(n)]
    for i, j, w in edges:
        for v in (i, j):
            if not (isinstance(v, (int, np.integer)) and 1 <= v <= n):
                raise NodeIdOutOfRange(f"node id {v!r} not in 1..{n}")
        if i == j:
            raise SelfLoop(f"self-loop at node {i}")
        w = float(w)
        if not math.isfinite(w):
            raise NonPositiveWeight(f"edge ({i},{j}) has non-finite weight {w}")
        if w <= 0:
            raise NonPositiveWeight(f"edge ({i},{j}) has weight {w}")
        if j in adj[i - 1]:
            raise DuplicateEdge(f"edge ({i},{j}) given twice")
        adj[i - 1][int(j)] = w
        adj[j - 1][int(i)] = w
    adjacency = tuple(tuple(sorted(a.items())) for a in adj)
    return WeightedGraph(int(n), adjacency)


def neighbors(g: WeightedGraph, i: int) -> list[tuple[int, float]]:
    g.check_node(i)
    return list(g.adjacency[i - 1])


def validate_connected(g: WeightedGraph) -> bool:
    """Breadth-first reachability from node 1."""
    seen = [False] * g.node_count
    seen[0] = True
    queue = deque([1])
    count = 1
    while queue:
        i = queue.popleft()
        for j, _ in g.adjacency[i - 1]:
            if not seen[j - 1]:
                seen[j - 1] = True
                count += 1
                queue.append(j)
    return count == g.node_count


def assign_roles(g: WeightedGraph, leaders: Iterable[int]) -> RoleAssignment:
    leaders = frozenset(int(i) for i in leaders)
    if not leaders:
        raise EmptyLeaderSet("at least one leader (destination) is required")
    for i in leaders:
        g.check_node(i)
    followers = frozenset(range(1, g.node_count + 1)) - leaders
    return RoleAssignment(leaders, followers)


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_edge_list(text: str) -> tuple[WeightedGraph, RoleAssignment]:
    """Read the text format::

        n m
        i j w      (m lines)
        leaders k
        id ...     (k ids, any line layout)

    Everything after ``#`` on a line is ignored.
    """
    lines = [s for s in map(_strip_comment, text.splitlines()) if s]
    if not lines:
        raise FormatError("empty edge list")
    try:
        n, m = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise FormatError(f"bad header line {lines[0]!r}") from exc
    if len(lines) < 1 + m + 1:
        raise FormatError(f"expected {m} edge lines followed by a leaders line")
    edges = []
    for line in lines[1 : 1 + m]:
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"bad edge line {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise FormatError(f"bad edge line {line!r}") from exc
    tokens = " ".join(lines[1 + m :]).split()
    if len(tokens) < 2 or tokens[0] != "leaders":
        raise FormatError("missing 'leaders k' line")
    try:
        k = int(tokens[1])
        ids = [int(t) for t in tokens[2:]]
    except ValueError as exc:
        raise FormatError("bad leader ids") from exc
    if len(ids) != k:
        raise FormatError(f"expected {k} leader ids, found {len(ids)}")
    g = build_graph(n, edges)
    return g, assign_roles(g, ids)


def format_edge_list(g: WeightedGraph, roles: RoleAssignment) -> str:
    edges = g.edges()
    out = [f"{g.node_count} {len(edges)}"]
    out += [f"{i} {j} {w!r}" for i, j, w in edges]
    leaders = sorted(roles.leaders)
    out.append(f"leaders {len(leaders)}")
    out.append(" ".join(map(str, leaders)))
    return "\n".join(out) + "\n"


def random_connected_graph(
    n: int,
    seed: int,
    max_weight: float = 10.0,
    extra_edge_prob: float | None = None,
) -> WeightedGraph:
    """Random spanning tree plus random chords, weights uniform in (0, max_weight].

    ``extra_edge_prob`` defaults to ``2 / n`` (mean degree around 4).
    """
    rng = np.random.default_rng(seed)
    if extra_edge_prob is None:
        extra_edge_prob = min(1.0, 2.0 / max(n, 1))
    order = rng.permutation(n) + 1
    pairs: set[tuple[int, int]] = set()
    for k in range(1, n):
        a = int(order[k])
        b = int(order[rng.integers(0, k)])
        pairs.add((min(a, b), max(a, b)))
    iu, ju = np.triu_indices(n, k=1)
    chords = rng.random(iu.size) < extra_edge_prob
    for a, b in zip(iu[chords] + 1, ju[chords] + 1):
        pairs.add((int(a), int(b)))
    ordered = sorted(pairs)
    # 1 - U maps [0, 1) onto (0, 1]
    weights = max_weight * (1.0 - rng.random(len(ordered)))
    return build_graph(n, [(a, b, float(w)) for (a, b), w in zip(ordered, weights)])


def random_leaders(n: int, seed: int, k: int = 1) -> Sequence[int]:
    """Deterministic choice of ``k`` distinct leader ids for test instances."""
    rng = np.random.default_rng(seed + 1_000_003)
    return sorted(int(v) + 1 for v in rng.choice(n, size=min(k, n), replace=False))
