"""Multi-source Dijkstra used as ground truth for consensus equilibria."""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .dynamics import StateVector
from .errors import EmptyLeaderSet, LengthMismatch, NotConnected
from .graph import WeightedGraph

__all__ = ["DistanceMap", "VerificationReport", "dijkstra_multi_source", "bellman_residuals", "verify_equilibrium"]


@dataclass(frozen=True)
class DistanceMap:
    dist: np.ndarray
    leaders: frozenset[int]

    def __getitem__(self, i: int) -> float:
        return float(self.dist[i - 1])


@dataclass(frozen=True)
class VerificationReport:
    max_abs_err: float
    worst_node: int
    passed: bool

    def to_json(self) -> str:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return json.dumps(d)


def dijkstra_multi_source(g: WeightedGraph, leaders: Iterable[int]) -> DistanceMap:
    """Distance from every node to its nearest leader.

    Equivalent to single-source Dijkstra from a virtual node joined to every
    leader by a zero-length edge. Equal keys pop in node-id order.
    """
    leaders = frozenset(int(i) for i in leaders)
    if not leaders:
        raise EmptyLeaderSet("at least one leader is required")
    for i in leaders:
        g.check_node(i)
    n = g.node_count
    dist = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    heap = [(0.0, i) for i in sorted(leaders)]
    for i in leaders:
        dist[i - 1] = 0.0
    heapq.heapify(heap)
    while heap:
        d, i = heapq.heappop(heap)
        if done[i - 1]:
            continue
        done[i - 1] = True
        for j, w in g.adjacency[i - 1]:
            nd = d + w
            if nd < dist[j - 1]:
                dist[j - 1] = nd
                heapq.heappush(heap, (nd, j))
    if not done.all():
        raise NotConnected(f"{int((~done).sum())} nodes cannot reach any leader")
    dist.setflags(write=False)
    return DistanceMap(dist, leaders)


def bellman_residuals(g: WeightedGraph, leaders: Iterable[int], x: np.ndarray) -> np.ndarray:
    """``|x_i - min_j (x_j + w_ij)|`` on non-leaders, ``|x_i|`` on leaders."""
    leaders = set(leaders)
    out = np.empty(g.node_count)
    for i, adj in enumerate(g.adjacency, start=1):
        if i in leaders:
            out[i - 1] = abs(x[i - 1])
        else:
            out[i - 1] = abs(x[i - 1] - min(x[j - 1] + w for j, w in adj))
    return out


def verify_equilibrium(s_eq: StateVector, d: DistanceMap, tol_verify: float) -> VerificationReport:
    x = s_eq.values if isinstance(s_eq, StateVector) else np.asarray(s_eq, dtype=float)
    if x.shape != d.dist.shape:
        raise LengthMismatch(f"state has {x.size} entries, distance map has {d.dist.size}")
    err = np.abs(x - d.dist)
    worst = int(np.argmax(err))
    max_err = float(err[worst])
    return VerificationReport(max_err, worst + 1, bool(max_err <= tol_verify))
