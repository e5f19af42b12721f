"""Biased min-consensus dynamics.

Followers evolve as ``eps * dx_i/dt = min_{j in N(i)} (x_j + w_ij) - x_i``;
leaders are frozen. Integration is explicit Euler,
``x_i <- x_i + (h / eps) * e_i``, evaluated synchronously from a frozen copy
of the previous state. With ``h == eps`` one step is exactly the Bellman
relaxation ``x_i <- min_j (x_j + w_ij)``.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, NonFiniteState, NotConnected
from .graph import RoleAssignment, WeightedGraph, validate_connected

__all__ = [
    "StateVector",
    "ResidualDiagnostics",
    "SimulationParams",
    "Trajectory",
    "init_state",
    "residuals",
    "residual",
    "diagnostics",
    "parent_set",
    "child_set",
    "step",
    "run",
]


@dataclass
class StateVector:
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return self.values.size

    def copy(self) -> "StateVector":
        return StateVector(self.values.copy(), self.time)


@dataclass(frozen=True)
class ResidualDiagnostics:
    residuals: np.ndarray
    upper: float
    lower: float
    upper_set: tuple[int, ...]
    lower_set: tuple[int, ...]

    @classmethod
    def from_residuals(cls, e: np.ndarray) -> "ResidualDiagnostics":
        upper = float(e.max())
        lower = float(e.min())
        return cls(
            residuals=e,
            upper=upper,
            lower=lower,
            upper_set=tuple(int(i) + 1 for i in np.flatnonzero(e == upper)),
            lower_set=tuple(int(i) + 1 for i in np.flatnonzero(e == lower)),
        )


@dataclass(frozen=True)
class SimulationParams:
    """Protocol gain, Euler step, stopping rule.

    ``step`` defaults to ``epsilon``. ``record_every`` defaults to 1 for
    graphs up to 1000 nodes and 100 above. ``workers > 1`` splits the
    residual sweep across threads; results are bit-identical.
    """

    epsilon: float = 1e-4
    step: float | None = None
    tol: float = 1e-9
    max_steps: int = 10_000_000
    record_every: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.step is None:
            object.__setattr__(self, "step", self.epsilon)
        for name in ("epsilon", "step", "tol"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if self.step > self.epsilon:
            raise ValueError(
                f"step {self.step} exceeds epsilon {self.epsilon}; explicit "
                "stepping requires step <= epsilon"
            )
        if self.max_steps < 1:
            raise ValueError("max_steps must be a positive integer")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if self.workers < 1:
            raise ValueError("workers must be a positive integer")

    @property
    def ratio(self) -> float:
        return self.step / self.epsilon


@dataclass
class Trajectory:
    """Recorded evolution of one run.

    ``snapshots`` are taken every ``record_every`` steps plus the final
    state. The ``*_history`` arrays have one entry per evaluated step
    (``steps_taken + 1`` entries) regardless of the recording stride.
    """

    snapshots: list[tuple[StateVector, ResidualDiagnostics]]
    converged: bool
    steps_taken: int
    upper_history: np.ndarray = field(repr=False)
    lower_history: np.ndarray = field(repr=False)
    max_state_history: np.ndarray = field(repr=False)

    @property
    def final(self) -> StateVector:
        return self.snapshots[-1][0]

    @property
    def final_diagnostics(self) -> ResidualDiagnostics:
        return self.snapshots[-1][1]

    def to_csv(self) -> str:
        n = len(self.final)
        buf = io.StringIO()
        header = ["t"] + [f"x_{i}" for i in range(1, n + 1)] + ["e_upper", "e_lower"]
        buf.write(",".join(header) + "\n")
        for s, d in self.snapshots:
            row = [repr(float(s.time))]
            row += [repr(float(v)) for v in s.values]
            row += [repr(d.upper), repr(d.lower)]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def diagnostics_jsonl(self) -> str:
        lines = []
        for s, d in self.snapshots:
            lines.append(
                json.dumps(
                    {
                        "t": s.time,
                        "e_upper": d.upper,
                        "e_lower": d.lower,
                        "upper_set": sorted(d.upper_set),
                        "lower_set": sorted(d.lower_set),
                    }
                )
            )
        return "\n".join(lines) + "\n"


def init_state(
    g: WeightedGraph,
    roles: RoleAssignment,
    policy: str = "zeros",
    *,
    values: Sequence[float] | None = None,
    low: float | None = None,
    high: float | None = None,
    seed: int | None = None,
) -> StateVector:
    """Initial state under one of three policies.

    ``"zeros"``: all nodes 0. ``"uniform"``: followers uniform on
    ``[low, high]`` (default ``[0, n * max_weight]``), seed required.
    ``"explicit"``: ``values`` taken verbatim, leaders included.
    Leaders are 0 under the first two policies.
    """
    n = g.node_count
    if policy == "zeros":
        x = np.zeros(n)
    elif policy == "uniform":
        if seed is None:
            raise ValueError("uniform initialisation requires a seed")
        low = 0.0 if low is None else float(low)
        high = n * g.max_weight if high is None else float(high)
        rng = np.random.default_rng(seed)
        x = rng.uniform(low, high, size=n)
        x[roles.leader_mask] = 0.0
    elif policy == "explicit":
        if values is None:
            raise ValueError("explicit initialisation requires values")
        x = np.array(values, dtype=float)
        if x.shape != (n,):
            raise LengthMismatch(f"expected {n} values, got {x.size}")
    else:
        raise ValueError(f"unknown init policy {policy!r}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteState("initial state contains NaN or infinity")
    return StateVector(x, 0.0)


def _check_len(g: WeightedGraph, x: np.ndarray) -> None:
    if x.shape != (g.node_count,):
        raise LengthMismatch(f"state has {x.size} entries, graph has {g.node_count} nodes")


def _min_terms(g: WeightedGraph, x: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """``min_j (x_j + weight_ij)`` per node, ``inf`` for isolated nodes."""
    starts, index, _ = g.csr
    if index.size == 0:
        return np.full(g.node_count, np.inf)
    isolated = g.isolated
    if isolated.any():
        starts = np.minimum(starts, index.size - 1)
    m = np.minimum.reduceat(x[index] + weight, starts)
    if isolated.any():
        m[isolated] = np.inf
    return m


def _bias_weights(g: WeightedGraph, bias: bool) -> np.ndarray:
    weight = g.csr[2]
    return weight if bias else np.zeros_like(weight)


class _PartitionedSweep:
    """Splits the min-sweep into contiguous node ranges run on a thread pool.

    Each range reads the same frozen ``x``; results are concatenated, so the
    output is bit-identical to the single-threaded sweep.
    """

    def __init__(self, g: WeightedGraph, workers: int):
        starts, index, _ = g.csr
        bounds = np.linspace(0, g.node_count, workers + 1).astype(int)
        self.parts = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            lo = int(starts[a]) if a < g.node_count else index.size
            hi = int(starts[b]) if b < g.node_count else index.size
            self.parts.append((a, b, lo, hi))
        self.g = g
        self.pool = ThreadPoolExecutor(workers)

    def __call__(self, x, weight):
        starts, index, _ = self.g.csr
        isolated = self.g.isolated

        def part(bounds):
            a, b, lo, hi = bounds
            if hi == lo:
                return np.full(b - a, np.inf)
            local = np.minimum(starts[a:b] - lo, hi - lo - 1)
            m = np.minimum.reduceat(x[index[lo:hi]] + weight[lo:hi], local)
            m[isolated[a:b]] = np.inf
            return m

        return np.concatenate(list(self.pool.map(part, self.parts)))

    def close(self):
        self.pool.shutdown()


def _residuals(g, mask, x, weight, sweep=None):
    m = _min_terms(g, x, weight) if sweep is None else sweep(x, weight)
    e = m - x
    e[mask] = 0.0
    return e, m


def residuals(
    g: WeightedGraph, roles: RoleAssignment, s: StateVector | np.ndarray, bias: bool = True
) -> np.ndarray:
    """Vector of ``e_i`` for all nodes (0 on leaders).

    ``bias=False`` drops the edge weights from the neighbor terms, giving
    plain min-consensus.
    """
    x = s.values if isinstance(s, StateVector) else np.asarray(s, dtype=float)
    _check_len(g, x)
    e, _ = _residuals(g, roles.leader_mask, x, _bias_weights(g, bias))
    return e


def residual(g: WeightedGraph, roles: RoleAssignment, s: StateVector, i: int) -> float:
    g.check_node(i)
    _check_len(g, s.values)
    if i in roles.leaders:
        return 0.0
    x = s.values
    return min(x[j - 1] + w for j, w in g.adjacency[i - 1]) - x[i - 1]


def diagnostics(g: WeightedGraph, roles: RoleAssignment, s: StateVector) -> ResidualDiagnostics:
    return ResidualDiagnostics.from_residuals(residuals(g, roles, s))


def parent_set(
    g: WeightedGraph, roles: RoleAssignment, s: StateVector, i: int, tol: float = 0.0
) -> frozenset[int]:
    """Neighbors ``j`` of follower ``i`` attaining ``min (x_j + w_ij)``.

    All candidate sums are computed first; with ``tol == 0`` membership is
    exact float equality with the minimum, otherwise within ``tol`` of it.
    """
    g.check_node(i)
    _check_len(g, s.values)
    if i in roles.leaders or not g.adjacency[i - 1]:
        return frozenset()
    x = s.values
    sums = [(j, x[j - 1] + w) for j, w in g.adjacency[i - 1]]
    best = min(v for _, v in sums)
    return frozenset(j for j, v in sums if v <= best + tol)


def child_set(
    g: WeightedGraph, roles: RoleAssignment, s: StateVector, i: int, tol: float = 0.0
) -> frozenset[int]:
    """Followers ``k`` with ``i`` in their parent set."""
    g.check_node(i)
    return frozenset(
        k
        for k, _ in g.adjacency[i - 1]
        if k in roles.followers and i in parent_set(g, roles, s, k, tol)
    )


def _advance(x, e, m, mask, ratio, check=True):
    if ratio == 1.0:
        # exact Bellman relaxation; avoids x + (m - x) rounding
        x_new = m.copy()
        x_new[mask] = x[mask]
    else:
        with np.errstate(invalid="ignore", over="ignore"):
            x_new = x + ratio * e
    if check and not np.all(np.isfinite(x_new)):
        raise NonFiniteState("state became NaN or infinite")
    return x_new


def step(
    g: WeightedGraph,
    roles: RoleAssignment,
    s: StateVector,
    params: SimulationParams,
    bias: bool = True,
) -> StateVector:
    """One synchronous Euler step of length ``params.step``."""
    _check_len(g, s.values)
    mask = roles.leader_mask
    e, m = _residuals(g, mask, s.values, _bias_weights(g, bias))
    x_new = _advance(s.values, e, m, mask, params.ratio)
    return StateVector(x_new, s.time + params.step)


def run(
    g: WeightedGraph,
    roles: RoleAssignment,
    s0: StateVector,
    params: SimulationParams,
    bias: bool = True,
    check_connected: bool = True,
) -> Trajectory:
    """Iterate :func:`step` until ``max|e_i| <= tol`` or ``max_steps`` steps.

    ``check_connected=False`` skips the connectivity check for callers that
    have already done it.
    """
    if check_connected and not validate_connected(g):
        raise NotConnected("graph is not connected")
    _check_len(g, s0.values)
    n = g.node_count
    stride = params.record_every or (1 if n <= 1000 else 100)
    mask = roles.leader_mask
    weight = _bias_weights(g, bias)
    ratio = params.ratio

    sweep = None
    if params.workers > 1 and g.node_count >= 2 * params.workers:
        sweep = _PartitionedSweep(g, params.workers)

    x = s0.values.copy()
    t0 = float(s0.time)
    upper, lower, xmax = [], [], []
    snapshots = []
    converged = False
    k = 0
    try:
        while True:
            e, m = _residuals(g, mask, x, weight, sweep)
            e_up, e_lo, x_hi = float(e.max()), float(e.min()), float(x.max())
            if not (math.isfinite(e_up) and math.isfinite(e_lo) and math.isfinite(x_hi)):
                raise NonFiniteState(f"state became NaN or infinite at step {k}")
            upper.append(e_up)
            lower.append(e_lo)
            xmax.append(x_hi)
            converged = max(e_up, -e_lo) <= params.tol
            done = converged or k == params.max_steps
            if k % stride == 0 or done:
                snapshots.append(
                    (StateVector(x.copy(), t0 + k * params.step),
                     ResidualDiagnostics.from_residuals(e))
                )
            if done:
                break
            # finiteness of the new state is checked on the next pass
            x = _advance(x, e, m, mask, ratio, check=False)
            k += 1
    finally:
        if sweep is not None:
            sweep.close()

    return Trajectory(
        snapshots=snapshots,
        converged=converged,
        steps_taken=k,
        upper_history=np.array(upper),
        lower_history=np.array(lower),
        max_state_history=np.array(xmax),
    )
