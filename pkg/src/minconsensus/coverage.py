"""Complete coverage of a grid by repeated consensus-guided moves.

Role convention is inverted relative to path solving: here the *leaders*
are the cells the robot has not yet visited (state pinned at 0) and the
*followers* are the visited cells. At equilibrium every visited cell holds
its distance to the nearest unvisited one, so parent chasing from the
robot's position leads to the closest unvisited cell.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import SimulationParams, StateVector, run
from .errors import NonConvergence, NotConnected
from .graph import RoleAssignment, validate_connected
from .grid import GridGraphMapping
from .paths import Path, extract_path

__all__ = ["CoverageState", "CoveragePlan", "CoverageReport", "plan_coverage", "coverage_report"]


@dataclass
class CoverageState:
    unvisited: set[int]
    visited: set[int]
    position: int

    def roles(self) -> RoleAssignment:
        return RoleAssignment(frozenset(self.unvisited), frozenset(self.visited))

    def move_along(self, path: Path) -> None:
        for i in path.nodes[1:]:
            self.unvisited.discard(i)
            self.visited.add(i)
        self.position = path.nodes[-1]


@dataclass
class CoveragePlan:
    trace: list[int]
    segments: list[Path] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.segments)

    def trace_text(self) -> str:
        return "".join(f"{i}\n" for i in self.trace)


@dataclass(frozen=True)
class CoverageReport:
    covered: int
    total: int
    revisits: int
    trace_length: int

    @property
    def complete(self) -> bool:
        return self.covered == self.total

    def to_json(self) -> str:
        return json.dumps({**asdict(self), "complete": self.complete})


def plan_coverage(
    mapping: GridGraphMapping,
    start: int,
    params: SimulationParams | None = None,
) -> CoveragePlan:
    """Drive a robot from ``start`` until every free cell has been visited.

    Each round re-solves the consensus with leaders = unvisited cells,
    warm-started from the previous equilibrium, then walks the lowest-id
    parent chain to the nearest unvisited cell.
    """
    g = mapping.graph
    g.check_node(start)
    if not validate_connected(g):
        raise NotConnected("free cells do not form one connected region")
    if params is None:
        params = SimulationParams(epsilon=1e-4)
    params = SimulationParams(
        epsilon=params.epsilon,
        step=params.step,
        tol=params.tol,
        max_steps=params.max_steps,
        record_every=params.max_steps,
        workers=params.workers,
    )

    state = CoverageState(set(range(1, g.node_count + 1)) - {start}, {start}, start)
    plan = CoveragePlan([start])
    x = np.zeros(g.node_count)
    while state.unvisited:
        roles = state.roles()
        x[roles.leader_mask] = 0.0
        traj = run(g, roles, StateVector(x), params, check_connected=False)
        if not traj.converged:
            raise NonConvergence(
                f"consensus did not converge within {params.max_steps} steps "
                f"({len(state.unvisited)} cells left)"
            )
        x = traj.final.values.copy()
        path = extract_path(g, roles, traj.final, state.position, "lowest_id", tol=params.tol)
        state.move_along(path)
        plan.trace.extend(path.nodes[1:])
        plan.segments.append(path)
    return plan


def coverage_report(plan: CoveragePlan, mapping: GridGraphMapping) -> CoverageReport:
    covered = len(set(plan.trace))
    return CoverageReport(
        covered=covered,
        total=mapping.graph.node_count,
        revisits=len(plan.trace) - covered,
        trace_length=len(plan.trace),
    )
