"""
Complete coverage of a cluttered room
=====================================

Unvisited cells act as leaders, visited cells as followers. After each
consensus solve the robot walks to the nearest unvisited cell; repeating
until nothing is left visits the whole reachable area.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from minconsensus import coverage_report, grid_to_graph, plan_coverage
from minconsensus.datasets import random_connected_grid

m = random_connected_grid(seed=12, max_side=24, max_density=0.25)
mapping = grid_to_graph(m, "four", check_connected=True)
plan = plan_coverage(mapping, start=1)
print(coverage_report(plan, mapping))

rc = np.array([mapping.cell(i) for i in plan.trace])
fig, ax = plt.subplots(figsize=(5, 5))
ax.imshow(np.where(m.free, 1.0, 0.0), cmap="gray")
ax.plot(rc[:, 1], rc[:, 0], "-", color="tab:green", lw=1)
ax.plot(rc[0, 1], rc[0, 0], "rs")
ax.axis("off")
fig.savefig("coverage_trace.png", dpi=100)
