"""Fixed instances used by the demos and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .graph import RoleAssignment, WeightedGraph, assign_roles, build_graph
from .grid import GridMap, generate_maze

# Destination is node 1. Node 8 has two tied parents (3 and 9), so node 10
# has exactly two shortest paths: 10-8-3-6-5-1 and 10-8-9-4-6-5-1, both of
# length 6.
TEN_NODE_EDGES = [
    (1, 5, 1.0),
    (5, 6, 1.0),
    (6, 3, 2.0),
    (6, 4, 1.0),
    (4, 9, 1.0),
    (3, 8, 1.0),
    (9, 8, 1.0),
    (8, 10, 1.0),
    (1, 2, 2.0),
    (2, 7, 1.0),
    (2, 3, 4.0),
    (7, 10, 10.0),
    (3, 4, 2.5),
]

TEN_NODE_DISTANCES = [0.0, 2.0, 4.0, 3.0, 1.0, 2.0, 3.0, 5.0, 4.0, 6.0]


def ten_node_graph() -> tuple[WeightedGraph, RoleAssignment]:
    g = build_graph(10, TEN_NODE_EDGES)
    return g, assign_roles(g, {1})


def _room_center(r: int, c: int, corridor: int, wall: int) -> tuple[int, int]:
    pitch = corridor + wall
    return wall + r * pitch + corridor // 2, wall + c * pitch + corridor // 2


def maze_254(seed: int = 7) -> GridMap:
    """254 x 254 pixel maze: 36 x 36 rooms, 5 px corridors, 2 px walls.

    Source in the top-left room; destinations in the bottom-right room and
    in a room on the right edge half way down.
    """
    corridor, wall, rooms = 5, 2, 36
    free = generate_maze(rooms, rooms, corridor, wall, seed=seed)
    return GridMap(
        free,
        sources=[_room_center(0, 0, corridor, wall)],
        destinations=[
            _room_center(rooms - 1, rooms - 1, corridor, wall),
            _room_center(rooms // 2, rooms - 1, corridor, wall),
        ],
    )


def desk_maze(seed: int = 3) -> GridMap:
    """64 x 64 pixel maze with 2 px corridors and 1 px walls."""
    corridor, wall, rooms = 2, 1, 21
    free = generate_maze(rooms, rooms, corridor, wall, seed=seed)
    return GridMap(
        free,
        sources=[_room_center(0, 0, corridor, wall)],
        destinations=[_room_center(rooms - 1, rooms - 1, corridor, wall)],
    )


def random_connected_grid(seed: int, max_side: int = 32, max_density: float = 0.3) -> GridMap:
    """Random obstacles, then every free cell outside the largest 4-connected region is filled."""
    rng = np.random.default_rng(seed)
    h, w = (int(v) for v in rng.integers(1, max_side + 1, size=2))
    free = rng.random((h, w)) >= rng.uniform(0, max_density)
    if not free.any():
        free[rng.integers(h), rng.integers(w)] = True
    labels = -np.ones((h, w), dtype=int)
    sizes = []
    for r0, c0 in zip(*np.nonzero(free)):
        if labels[r0, c0] >= 0:
            continue
        label, stack, size = len(sizes), [(r0, c0)], 0
        labels[r0, c0] = label
        while stack:
            r, c = stack.pop()
            size += 1
            for rr, cc in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                if 0 <= rr < h and 0 <= cc < w and free[rr, cc] and labels[rr, cc] < 0:
                    labels[rr, cc] = label
                    stack.append((rr, cc))
        sizes.append(size)
    return GridMap(labels == int(np.argmax(sizes)))
