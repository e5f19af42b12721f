"""Command-line front end.

Exit codes: 0 success, 1 I/O or input errors, 2 disconnected graph or free
space, 3 no convergence within ``--max-steps``, 4 oracle verification
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path as FsPath

import numpy as np

from .coverage import coverage_report, plan_coverage
from .dynamics import SimulationParams, StateVector, init_state, run
from .errors import ConsensusError, FormatError, NonConvergence, NotConnected
from .graph import assign_roles, parse_edge_list, random_connected_graph, random_leaders
from .grid import GridMap, grid_to_graph, parse_ascii_grid, parse_pgm, render_field, render_path
from .oracle import dijkstra_multi_source, verify_equilibrium
from .paths import Path, build_dag, extract_path

EXIT_OK, EXIT_INPUT, EXIT_DISCONNECTED, EXIT_NONCONVERGENCE, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; 2 is reserved for disconnected input
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def write_atomic(path: str | os.PathLike, data: str | bytes) -> None:
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def format_state(x: np.ndarray) -> str:
    return "".join(f"{i} {float(v)!r}\n" for i, v in enumerate(x, start=1))


def parse_state(text: str, n: int) -> StateVector:
    """Read ``node value`` lines; ``#`` starts a comment."""
    values = np.full(n, np.nan)
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"bad state line {line!r}")
        try:
            i, v = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise FormatError(f"bad state line {line!r}") from exc
        if not 1 <= i <= n:
            raise FormatError(f"state node id {i} outside 1..{n}")
        values[i - 1] = v
    if np.isnan(values).any():
        missing = np.flatnonzero(np.isnan(values))[0] + 1
        raise FormatError(f"state file has no value for node {missing}")
    return StateVector(values)


def _cell(text: str) -> tuple[int, int]:
    try:
        r, c = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected row,col, got {text!r}") from None
    return r, c


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


def _params(args, record_every=None) -> SimulationParams:
    step = args.step if args.step is not None else args.epsilon
    if step > args.epsilon:
        raise UsageError(f"--step {step} exceeds --epsilon {args.epsilon}")
    return SimulationParams(
        epsilon=args.epsilon,
        step=step,
        tol=args.tol,
        max_steps=args.max_steps,
        record_every=record_every,
        workers=args.workers,
    )


def _initial(args, g, roles):
    if args.init == "random":
        return init_state(g, roles, "uniform", seed=args.seed)
    return init_state(g, roles, "zeros")


def _read_graph(path):
    return parse_edge_list(FsPath(path).read_text())


def _read_grid(args) -> GridMap:
    data = FsPath(args.input).read_bytes()
    if data[:2] in (b"P2", b"P5"):
        m = parse_pgm(data, args.threshold)
    else:
        m = parse_ascii_grid(data.decode())
    sources = list(args.source) if args.source else list(m.sources)
    dests = list(m.destinations) + [d for d in (getattr(args, "dest", None) or []) if d not in m.destinations]
    return GridMap(m.free, sources, dests)


def _out(args) -> FsPath:
    return FsPath(args.out)


def _converged_or_raise(traj, params):
    if not traj.converged:
        raise NonConvergence(
            f"no convergence within {params.max_steps} steps "
            f"(max |e| = {max(traj.final_diagnostics.upper, -traj.final_diagnostics.lower):g})"
        )


def cmd_solve(args) -> int:
    g, roles = _read_graph(args.input)
    params = _params(args, args.record_every)
    traj = run(g, roles, _initial(args, g, roles), params)
    out = _out(args)
    write_atomic(out / "trajectory.csv", traj.to_csv())
    write_atomic(out / "diagnostics.jsonl", traj.diagnostics_jsonl())
    write_atomic(out / "state.txt", format_state(traj.final.values))
    _converged_or_raise(traj, params)
    dag = build_dag(g, roles, traj.final, params.tol)
    for i in range(1, g.node_count + 1):
        print(f"{i} x={float(traj.final.values[i - 1])!r} parents={sorted(dag[i])}")
    return EXIT_OK


def cmd_trace(args) -> int:
    g, roles = _read_graph(args.input)
    params = _params(args, args.record_every or 1)
    traj = run(g, roles, _initial(args, g, roles), params)
    out = _out(args)
    write_atomic(out / "trajectory.csv", traj.to_csv())
    write_atomic(out / "diagnostics.jsonl", traj.diagnostics_jsonl())
    print(json.dumps({"converged": traj.converged, "steps": traj.steps_taken, "snapshots": len(traj.snapshots)}))
    return EXIT_OK if traj.converged else EXIT_NONCONVERGENCE


def cmd_maze(args) -> int:
    m = _read_grid(args)
    if not m.sources:
        raise UsageError("maze needs a source: --source r,c or an S marker")
    mapping = grid_to_graph(m, args.connectivity, check_connected=True)
    g, roles = mapping.graph, mapping.roles()
    params = _params(args, args.frames)
    traj = run(g, roles, _initial(args, g, roles), params)
    _converged_or_raise(traj, params)
    out = _out(args)
    if args.frames:
        for k, (s, _) in enumerate(traj.snapshots):
            write_atomic(out / "frames" / f"frame_{k:05d}.pgm", render_field(m, mapping, s, "pgm"))
    source = mapping.node(m.sources[0])
    path = extract_path(g, roles, traj.final, source, "lowest_id", tol=params.tol)
    oracle = dijkstra_multi_source(g, roles.leaders)
    err = abs(path.length - oracle[source])
    write_atomic(out / "path.txt", path.to_text())
    payload = json.loads(path.to_json())
    payload["cells"] = [list(mapping.cell(i)) for i in path.nodes]
    write_atomic(out / "path.json", json.dumps(payload) + "\n")
    write_atomic(out / "path.pgm", render_path(m, mapping, path))
    write_atomic(out / "field.pgm", render_field(m, mapping, traj.final, "pgm"))
    report = {
        "nodes": g.node_count,
        "steps": traj.steps_taken,
        "path_length": path.length,
        "oracle_distance": oracle[source],
        "abs_err": err,
        "pass": err <= args.tol_verify,
    }
    print(json.dumps(report))
    return EXIT_OK if report["pass"] else EXIT_VERIFY


def cmd_cover(args) -> int:
    m = _read_grid(args)
    if not m.sources:
        raise UsageError("cover needs a start cell: --source r,c or an S marker")
    mapping = grid_to_graph(m, args.connectivity, check_connected=True)
    start = mapping.node(m.sources[0])
    plan = plan_coverage(mapping, start, _params(args))
    report = coverage_report(plan, mapping)
    out = _out(args)
    write_atomic(out / "trace.txt", plan.trace_text())
    write_atomic(out / "summary.json", report.to_json() + "\n")
    if args.frames:
        walked: list[int] = [start]
        for k, seg in enumerate(plan.segments):
            walked.extend(seg.nodes[1:])
            if k % args.frames == 0 or k == len(plan.segments) - 1:
                frame = render_path(m, mapping, Path(tuple(walked), 0.0))
                write_atomic(out / "frames" / f"frame_{k:05d}.pgm", frame)
    print(report.to_json())
    return EXIT_OK if report.complete else EXIT_VERIFY


def cmd_verify(args) -> int:
    if args.seeds:
        return _verify_batch(args)
    if not args.input:
        raise UsageError("verify needs --input, or --n/--seeds for a random batch")
    g, roles = _read_graph(args.input)
    if args.state:
        s = parse_state(FsPath(args.state).read_text(), g.node_count)
    else:
        params = _params(args, 10**9)
        traj = run(g, roles, _initial(args, g, roles), params)
        _converged_or_raise(traj, params)
        s = traj.final
    report = verify_equilibrium(s, dijkstra_multi_source(g, roles.leaders), args.tol_verify)
    print(report.to_json())
    return EXIT_OK if report.passed else EXIT_VERIFY


def _verify_batch(args) -> int:
    params = _params(args, 10**9)
    passed, worst = 0, 0.0
    for seed in range(args.seed, args.seed + args.seeds):
        g = random_connected_graph(args.n, seed)
        roles = assign_roles(g, random_leaders(args.n, seed))
        traj = run(g, roles, _initial(args, g, roles), params)
        report = verify_equilibrium(traj.final, dijkstra_multi_source(g, roles.leaders), args.tol_verify)
        passed += traj.converged and report.passed
        worst = max(worst, report.max_abs_err)
    summary = {"instances": args.seeds, "passed": passed, "max_abs_err": worst, "pass": passed == args.seeds}
    print(json.dumps(summary))
    return EXIT_OK if summary["pass"] else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minconsensus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--input")
    common.add_argument("--epsilon", type=_positive(float), default=1e-4)
    common.add_argument("--step", type=_positive(float), default=None, help="Euler step (default: epsilon)")
    common.add_argument("--tol", type=_positive(float), default=1e-9)
    common.add_argument("--max-steps", type=_positive(int), default=10_000_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--init", choices=("zeros", "random"), default="zeros")
    common.add_argument("--workers", type=_positive(int), default=1)
    common.add_argument("--out", default=".")

    grid = _Parser(add_help=False)
    grid.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    grid.add_argument("--source", type=_cell, action="append")
    grid.add_argument("--threshold", type=int, default=128)
    grid.add_argument("--frames", type=_positive(int), default=None)

    p = sub.add_parser("solve", parents=[common], help="run to equilibrium on an edge-list graph")
    p.add_argument("--record-every", type=_positive(int), default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("trace", parents=[common], help="record a transient trajectory")
    p.add_argument("--record-every", type=_positive(int), default=None)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("maze", parents=[common, grid], help="solve a grid maze")
    p.add_argument("--dest", type=_cell, action="append")
    p.add_argument("--tol-verify", type=_positive(float), default=1e-6)
    p.set_defaults(func=cmd_maze)

    p = sub.add_parser("cover", parents=[common, grid], help="plan complete coverage of a grid")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("verify", parents=[common], help="check an equilibrium against Dijkstra")
    p.add_argument("--state")
    p.add_argument("--tol-verify", type=_positive(float), default=1e-6)
    p.add_argument("--n", type=_positive(int), default=50)
    p.add_argument("--seeds", type=_positive(int), default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("solve", "trace", "maze", "cover") and not args.input:
        print(f"error: {args.command} needs --input", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except NotConnected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ConsensusError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
