"""Shortest paths read off a converged consensus state by parent chasing."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .dynamics import StateVector, parent_set, residuals
from .errors import CycleDetected, EnumerationCapExceeded, NotConverged
from .graph import RoleAssignment, WeightedGraph

__all__ = ["Path", "ShortestPathDag", "path_length", "extract_path", "build_dag"]


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    length: float

    def to_text(self) -> str:
        return " ".join(map(str, self.nodes)) + f"\nlength {self.length!r}\n"

    def to_json(self) -> str:
        return json.dumps({"nodes": list(self.nodes), "length": self.length})

    @classmethod
    def from_text(cls, text: str) -> "Path":
        lines = [s.strip() for s in text.splitlines() if s.strip()]
        nodes = tuple(int(t) for t in lines[0].split())
        key, value = lines[1].split()
        if key != "length":
            raise ValueError(f"expected 'length <value>', got {lines[1]!r}")
        return cls(nodes, float(value))


@dataclass(frozen=True)
class ShortestPathDag:
    parents: tuple[frozenset[int], ...]

    def __getitem__(self, i: int) -> frozenset[int]:
        return self.parents[i - 1]

    def count_paths(self, source: int) -> int:
        """Number of distinct parent-following walks from ``source`` to a leader."""
        memo: dict[int, int] = {}
        for i in self._topo_from(source):
            ps = self.parents[i - 1]
            memo[i] = 1 if not ps else sum(memo[p] for p in ps)
        return memo[source]

    def _topo_from(self, source: int) -> list[int]:
        # post-order over reachable nodes; parents before children
        order, state = [], {}
        stack = [(source, iter(sorted(self.parents[source - 1])))]
        state[source] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                state[node] = 2
                order.append(node)
            elif state.get(nxt) == 1:
                raise CycleDetected(f"parent cycle through node {nxt}")
            elif nxt not in state:
                state[nxt] = 1
                stack.append((nxt, iter(sorted(self.parents[nxt - 1]))))
        return order


def path_length(g: WeightedGraph, nodes: tuple[int, ...] | list[int]) -> float:
    """Sum of edge weights along consecutive nodes; raises if two are not adjacent."""
    ws = []
    for a, b in zip(nodes, nodes[1:]):
        w = dict(g.adjacency[a - 1]).get(b)
        if w is None:
            raise ValueError(f"nodes {a} and {b} are not adjacent")
        ws.append(w)
    return math.fsum(ws)


def _check_converged(g, roles, s_eq, tol):
    e = residuals(g, roles, s_eq)
    worst = float(np.max(np.abs(e))) if e.size else 0.0
    if not worst <= tol:
        raise NotConverged(f"max |residual| = {worst:g} exceeds tol {tol:g}")


def build_dag(
    g: WeightedGraph, roles: RoleAssignment, s_eq: StateVector, tol: float = 1e-9
) -> ShortestPathDag:
    """Parent sets of every node at equilibrium.

    Parents are matched within ``10 * tol`` of the minimum so float noise
    cannot drop a tied parent.
    """
    _check_converged(g, roles, s_eq, tol)
    tol_parent = 10 * tol
    parents = tuple(
        parent_set(g, roles, s_eq, i, tol_parent) for i in range(1, g.node_count + 1)
    )
    dag = ShortestPathDag(parents)
    indeg = [0] * g.node_count
    for i, ps in enumerate(parents, start=1):
        if i in roles.followers and not ps:
            raise CycleDetected(f"follower {i} has no parent")
        for p in ps:
            indeg[p - 1] += 1
    # Kahn on the child -> parent edges
    ready = [i for i in range(1, g.node_count + 1) if indeg[i - 1] == 0]
    seen = 0
    while ready:
        i = ready.pop()
        seen += 1
        for p in parents[i - 1]:
            indeg[p - 1] -= 1
            if indeg[p - 1] == 0:
                ready.append(p)
    if seen != g.node_count:
        raise CycleDetected("parent relation has a cycle; tolerance too loose for this equilibrium")
    return dag


def extract_path(
    g: WeightedGraph,
    roles: RoleAssignment,
    s_eq: StateVector,
    source: int,
    tie_break: Literal["lowest_id", "all"] = "lowest_id",
    tol: float = 1e-9,
    cap: int = 1_000_000,
) -> Path | list[Path]:
    """Follow parents from ``source`` until a leader is reached.

    ``lowest_id`` returns one :class:`Path`, taking the smallest parent id
    at every hop. ``all`` returns every distinct shortest path, in
    lexicographic node order, or raises :class:`EnumerationCapExceeded`
    when more than ``cap`` exist. A leader source gives the single-node
    path of length 0.
    """
    g.check_node(source)
    _check_converged(g, roles, s_eq, tol)
    tol_parent = 10 * tol
    if tie_break == "lowest_id":
        nodes = [source]
        seen = {source}
        while nodes[-1] not in roles.leaders:
            ps = parent_set(g, roles, s_eq, nodes[-1], tol_parent)
            if not ps:
                raise CycleDetected(f"follower {nodes[-1]} has no parent")
            nxt = min(ps)
            if nxt in seen:
                raise CycleDetected(f"parent chain revisits node {nxt}")
            seen.add(nxt)
            nodes.append(nxt)
        return Path(tuple(nodes), path_length(g, nodes))
    if tie_break != "all":
        raise ValueError(f"unknown tie_break {tie_break!r}")

    dag = build_dag(g, roles, s_eq, tol)
    total = dag.count_paths(source)
    if total > cap:
        raise EnumerationCapExceeded(f"{total} shortest paths exceed cap {cap}")
    out: list[Path] = []
    stack = [(source,)]
    while stack:
        prefix = stack.pop()
        ps = dag[prefix[-1]]
        if not ps:
            out.append(Path(prefix, path_length(g, prefix)))
            continue
        for p in sorted(ps, reverse=True):
            stack.append(prefix + (p,))
    return out
