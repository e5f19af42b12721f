"""Occupancy grids: ASCII and PGM input, grid-to-graph mapping, PGM/CSV rendering.

Cells are addressed ``(row, col)``, 0-based from the top-left. Free cells are
numbered row-major to form node ids ``1..n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .dynamics import StateVector
from .errors import (
    LengthMismatch,
    MalformedHeader,
    NoDestination,
    NoFreeCells,
    NotConnected,
    PathOffGrid,
    RaggedRows,
    TruncatedPayload,
    UnknownCharacter,
)
from .graph import RoleAssignment, WeightedGraph, assign_roles, build_graph, validate_connected

__all__ = [
    "GridMap",
    "GridGraphMapping",
    "parse_ascii_grid",
    "serialize_ascii_grid",
    "parse_pgm",
    "write_pgm",
    "grid_to_graph",
    "render_field",
    "render_path",
    "generate_maze",
]

Cell = tuple[int, int]

OBSTACLE, FREE, SOURCE, DEST = "#", ".", "S", "D"


@dataclass
class GridMap:
    """``free[r, c]`` is True for traversable cells."""

    free: np.ndarray
    sources: list[Cell] = field(default_factory=list)
    destinations: list[Cell] = field(default_factory=list)

    def __post_init__(self):
        self.free = np.asarray(self.free, dtype=bool)
        if self.free.ndim != 2:
            raise ValueError("grid must be 2-D")
        for cell in (*self.sources, *self.destinations):
            if not self.is_free(cell):
                raise PathOffGrid(f"marker {cell} is not on a free cell")

    @property
    def height(self) -> int:
        return self.free.shape[0]

    @property
    def width(self) -> int:
        return self.free.shape[1]

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and bool(self.free[cell])


@dataclass(frozen=True)
class GridGraphMapping:
    graph: WeightedGraph
    cell_of_node: tuple[Cell, ...]
    node_of_cell: dict[Cell, int]
    leaders: tuple[int, ...]
    shape: tuple[int, int]

    def node(self, cell: Cell) -> int:
        try:
            return self.node_of_cell[tuple(cell)]
        except KeyError:
            raise PathOffGrid(f"cell {cell} is not a free cell") from None

    def cell(self, i: int) -> Cell:
        self.graph.check_node(i)
        return self.cell_of_node[i - 1]

    def roles(self) -> RoleAssignment:
        if not self.leaders:
            raise NoDestination("grid has no destination cells")
        return assign_roles(self.graph, self.leaders)


def parse_ascii_grid(text: str) -> GridMap:
    rows = [line.rstrip("\r") for line in text.splitlines()]
    while rows and not rows[-1]:
        rows.pop()
    if not rows:
        raise RaggedRows("empty grid")
    width = len(rows[0])
    free = np.zeros((len(rows), width), dtype=bool)
    sources, dests = [], []
    for r, line in enumerate(rows):
        if len(line) != width:
            raise RaggedRows(f"row {r} has length {len(line)}, expected {width}")
        for c, ch in enumerate(line):
            if ch == OBSTACLE:
                continue
            if ch not in (FREE, SOURCE, DEST):
                raise UnknownCharacter(f"unexpected {ch!r} at ({r},{c})")
            free[r, c] = True
            if ch == SOURCE:
                sources.append((r, c))
            elif ch == DEST:
                dests.append((r, c))
    return GridMap(free, sources, dests)


def serialize_ascii_grid(m: GridMap) -> str:
    chars = np.where(m.free, FREE, OBSTACLE).astype("<U1")
    for r, c in m.sources:
        chars[r, c] = SOURCE
    for r, c in m.destinations:
        chars[r, c] = DEST
    return "\n".join("".join(row) for row in chars) + "\n"


def _pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` header tokens and the offset just past the last one."""
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise MalformedHeader("header ended early")
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 or P5 image into a ``uint8`` array of shape (height, width)."""
    tokens, pos = _pgm_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"unsupported magic {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeader("non-integer size or maxval") from exc
    if width < 1 or height < 1 or not 0 < maxval <= 255:
        raise MalformedHeader(f"bad dimensions {width}x{height} or maxval {maxval}")
    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header from raster
        raster = data[pos + 1 : pos + 1 + count]
        if len(raster) < count:
            raise TruncatedPayload(f"expected {count} pixels, found {len(raster)}")
        pixels = np.frombuffer(raster, dtype=np.uint8)
    else:
        body = data[pos:].split()
        if len(body) < count:
            raise TruncatedPayload(f"expected {count} pixels, found {len(body)}")
        try:
            pixels = np.array([int(t) for t in body[:count]])
        except ValueError as exc:
            raise MalformedHeader("non-integer pixel value") from exc
        if pixels.min() < 0 or pixels.max() > maxval:
            raise MalformedHeader("pixel value outside 0..maxval")
        pixels = pixels.astype(np.uint8)
    return pixels.reshape(height, width).copy()


def parse_pgm(data: bytes, threshold: int = 128) -> GridMap:
    """Pixels below ``threshold`` are obstacles. Markers must be added separately."""
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must be in 0..255")
    return GridMap(read_pgm(data) >= threshold)


def write_pgm(pixels: np.ndarray) -> bytes:
    """Plain (P2) encoding, maxval 255, one image row per line."""
    pixels = np.asarray(pixels)
    h, w = pixels.shape
    lines = ["P2", f"{w} {h}", "255"]
    lines += [" ".join(str(int(v)) for v in row) for row in pixels]
    return ("\n".join(lines) + "\n").encode("ascii")


_SIDE = ((0, 1), (1, 0))
_DIAG = ((1, 1), (1, -1))


def grid_to_graph(
    m: GridMap,
    connectivity: Literal["four", "eight", 4, 8] = "eight",
    check_connected: bool = False,
) -> GridGraphMapping:
    """Graph over free cells with unit side edges and, for eight, sqrt(2) diagonals.

    Destination cells become leaders. Connectivity of the free space is
    only enforced when ``check_connected`` is set; solvers check it before
    simulating.
    """
    conn = {"four": 4, "eight": 8, 4: 4, 8: 8}.get(connectivity)
    if conn is None:
        raise ValueError(f"connectivity must be four or eight, got {connectivity!r}")
    free = m.free
    if not free.any():
        raise NoFreeCells("grid has no free cells")
    ids = np.zeros(free.shape, dtype=np.int64)
    rr, cc = np.nonzero(free)
    ids[rr, cc] = np.arange(1, rr.size + 1)
    h, w = free.shape
    offsets = [(d, 1.0) for d in _SIDE]
    if conn == 8:
        offsets += [(d, math.sqrt(2.0)) for d in _DIAG]
    edges = []
    for (dr, dc), weight in offsets:
        r2, c2 = rr + dr, cc + dc
        ok = (r2 >= 0) & (r2 < h) & (c2 >= 0) & (c2 < w)
        a_r, a_c, b_r, b_c = rr[ok], cc[ok], r2[ok], c2[ok]
        both = free[b_r, b_c]
        for a, b in zip(ids[a_r[both], a_c[both]].tolist(), ids[b_r[both], b_c[both]].tolist()):
            edges.append((a, b, weight))
    g = build_graph(int(rr.size), edges)
    if check_connected and not validate_connected(g):
        raise NotConnected("free cells do not form one connected region")
    cells = tuple(zip(rr.tolist(), cc.tolist()))
    node_of_cell = {cell: i for i, cell in enumerate(cells, start=1)}
    leaders = tuple(sorted({node_of_cell[tuple(d)] for d in m.destinations}))
    return GridGraphMapping(g, cells, node_of_cell, leaders, (h, w))


def _state_values(mapping: GridGraphMapping, s) -> np.ndarray:
    x = s.values if isinstance(s, StateVector) else np.asarray(s, dtype=float)
    if x.shape != (mapping.graph.node_count,):
        raise LengthMismatch(f"state has {x.size} entries, grid has {mapping.graph.node_count} free cells")
    return x


def render_field(
    m: GridMap,
    mapping: GridGraphMapping,
    s: StateVector,
    out_format: Literal["csv", "pgm"] = "pgm",
) -> bytes:
    """State values per free cell as CSV rows or a rescaled grayscale image.

    The PGM maps the free-cell minimum to 0 and maximum to 255; a constant
    field renders as 255. Obstacles are 0.
    """
    x = _state_values(mapping, s)
    if out_format == "csv":
        lines = ["row,col,x"]
        lines += [f"{r},{c},{v!r}" for (r, c), v in zip(mapping.cell_of_node, x.tolist())]
        return ("\n".join(lines) + "\n").encode("ascii")
    if out_format != "pgm":
        raise ValueError(f"unknown format {out_format!r}")
    lo, hi = float(x.min()), float(x.max())
    if hi > lo:
        scaled = np.rint((x - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.full(x.shape, 255.0)
    img = np.zeros(mapping.shape, dtype=np.uint8)
    rr, cc = np.array(mapping.cell_of_node).T
    img[rr, cc] = scaled.astype(np.uint8)
    return write_pgm(img)


PATH_GRAY = 128


def render_path(m: GridMap, mapping: GridGraphMapping, p, out_format: str = "pgm") -> bytes:
    if out_format != "pgm":
        raise ValueError("paths render to pgm only")
    img = np.where(m.free, 255, 0).astype(np.uint8)
    for i in p.nodes:
        if not 1 <= i <= mapping.graph.node_count:
            raise PathOffGrid(f"node {i} is not a free cell")
        img[mapping.cell_of_node[i - 1]] = PATH_GRAY
    return write_pgm(img)


def generate_maze(
    cells_high: int,
    cells_wide: int,
    corridor: int = 1,
    wall: int = 1,
    seed: int = 0,
    loops: float = 0.0,
) -> np.ndarray:
    """Random maze as a boolean free-cell array.

    Carves a perfect maze with an iterative depth-first backtracker over a
    ``cells_high x cells_wide`` lattice, then knocks out a ``loops``
    fraction of the remaining interior walls. Output shape is
    ``cells * (corridor + wall) + wall`` on each axis.
    """
    rng = np.random.default_rng(seed)
    pitch = corridor + wall
    free = np.zeros((cells_high * pitch + wall, cells_wide * pitch + wall), dtype=bool)

    def room(r, c):
        return slice(wall + r * pitch, wall + r * pitch + corridor), slice(
            wall + c * pitch, wall + c * pitch + corridor
        )

    def open_between(r, c, r2, c2):
        (rs, cs), (rs2, cs2) = room(r, c), room(r2, c2)
        free[min(rs.start, rs2.start) : max(rs.stop, rs2.stop),
             min(cs.start, cs2.start) : max(cs.stop, cs2.stop)] = True

    visited = np.zeros((cells_high, cells_wide), dtype=bool)
    visited[0, 0] = True
    free[room(0, 0)] = True
    stack = [(0, 0)]
    while stack:
        r, c = stack[-1]
        options = [
            (r + dr, c + dc)
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
            if 0 <= r + dr < cells_high and 0 <= c + dc < cells_wide and not visited[r + dr, c + dc]
        ]
        if not options:
            stack.pop()
            continue
        r2, c2 = options[rng.integers(len(options))]
        visited[r2, c2] = True
        open_between(r, c, r2, c2)
        stack.append((r2, c2))

    if loops > 0:
        for r in range(cells_high):
            for c in range(cells_wide):
                for r2, c2 in ((r + 1, c), (r, c + 1)):
                    if r2 < cells_high and c2 < cells_wide and rng.random() < loops:
                        open_between(r, c, r2, c2)
    return free
