"""
Shortest paths on a 10-node graph
=================================

Node 1 is the destination. Every other node runs the biased min-consensus
update and settles at its distance to node 1. Following parents back from
node 10 then gives both tied shortest paths.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from minconsensus import (
    SimulationParams,
    dijkstra_multi_source,
    extract_path,
    init_state,
    run,
)
from minconsensus.datasets import ten_node_graph

g, roles = ten_node_graph()

# A small Euler step (eps / 20) traces the continuous-time transient.
eps = 1e-6
params = SimulationParams(epsilon=eps, step=eps / 20)
s0 = init_state(g, roles, "uniform", low=0, high=10, seed=1)
traj = run(g, roles, s0, params)
print("converged after", traj.steps_taken, "steps")

# Compare the equilibrium with Dijkstra.
dist = dijkstra_multi_source(g, roles.leaders).dist
for i, (x, d) in enumerate(zip(traj.final.values, dist), start=1):
    print(f"node {i:2d}: consensus {x:8.5f}   dijkstra {d:8.5f}")

for p in extract_path(g, roles, traj.final, 10, "all"):
    print(" -> ".join(map(str, p.nodes)), " length", p.length)

t = np.array([s.time for s, _ in traj.snapshots])
x = np.array([s.values for s, _ in traj.snapshots])
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(t * 1e6, x)
ax.set_xlabel("t (microseconds)")
ax.set_ylabel("x_i")
ax.legend([str(i) for i in range(1, 11)], ncol=5, fontsize=7)
fig.tight_layout()
fig.savefig("ten_node_transient.png", dpi=120)
