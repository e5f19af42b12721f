"""
Solving a 254 x 254 maze
========================

Each free pixel is a node; destination pixels are leaders pinned at 0.
Starting from random states, the field relaxes into a distance map whose
descent direction leads to the nearest destination.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from minconsensus import SimulationParams, extract_path, grid_to_graph, init_state, run
from minconsensus.datasets import maze_254

m = maze_254()
mapping = grid_to_graph(m, "eight", check_connected=True)
g, roles = mapping.graph, mapping.roles()
print(f"{m.free.size} pixels, {g.node_count} free nodes, {g.edge_count} edges")

params = SimulationParams(epsilon=1e-4, record_every=400)
traj = run(g, roles, init_state(g, roles, "uniform", seed=0), params)
print("converged:", traj.converged, "after", traj.steps_taken, "steps")


def as_image(values):
    img = np.full(m.free.shape, np.nan)
    rr, cc = np.array(mapping.cell_of_node).T
    img[rr, cc] = values
    return img


# Snapshots of the relaxing field, then the equilibrium.
frames = traj.snapshots[:: max(1, len(traj.snapshots) // 5)][:5] + [traj.snapshots[-1]]
fig, axes = plt.subplots(1, len(frames), figsize=(3 * len(frames), 3))
for ax, (s, _) in zip(axes, frames):
    ax.imshow(as_image(s.values), cmap="viridis")
    ax.set_title(f"t = {s.time:.3f} s", fontsize=8)
    ax.axis("off")
fig.tight_layout()
fig.savefig("maze_field.png", dpi=100)

# Shortest path from the source by parent chasing.
source = mapping.node(m.sources[0])
path = extract_path(g, roles, traj.final, source)
print("path length", path.length, "through", len(path.nodes), "pixels")
img = np.where(m.free, 1.0, 0.0)
fig, ax = plt.subplots(figsize=(5, 5))
ax.imshow(img, cmap="gray")
pr, pc = np.array([mapping.cell(i) for i in path.nodes]).T
ax.plot(pc, pr, "r-", lw=1.5)
ax.axis("off")
fig.savefig("maze_path.png", dpi=100)
