"""Shortest paths, maze solving and coverage planning via biased min-consensus."""

from .coverage import CoveragePlan, CoverageReport, coverage_report, plan_coverage
from .dynamics import (
    ResidualDiagnostics,
    SimulationParams,
    StateVector,
    Trajectory,
    child_set,
    diagnostics,
    init_state,
    parent_set,
    residual,
    residuals,
    run,
    step,
)
from .errors import *  # noqa: F401,F403
from .graph import (
    RoleAssignment,
    WeightedGraph,
    assign_roles,
    build_graph,
    format_edge_list,
    neighbors,
    parse_edge_list,
    random_connected_graph,
    random_leaders,
    validate_connected,
)
from .grid import (
    GridGraphMapping,
    GridMap,
    generate_maze,
    grid_to_graph,
    parse_ascii_grid,
    parse_pgm,
    render_field,
    render_path,
    serialize_ascii_grid,
    write_pgm,
)
from .oracle import DistanceMap, VerificationReport, dijkstra_multi_source, verify_equilibrium
from .paths import Path, ShortestPathDag, build_dag, extract_path, path_length

__version__ = "0.1.0"
