"""
Residual bounds along a trajectory
==================================

The largest residual never grows and the smallest never shrinks while the
state converges, for any Euler step up to the protocol gain.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from minconsensus import (
    SimulationParams,
    assign_roles,
    init_state,
    random_connected_graph,
    random_leaders,
    run,
)

g = random_connected_graph(60, seed=5)
roles = assign_roles(g, random_leaders(60, 5, k=2))
s0 = init_state(g, roles, "uniform", seed=5)

fig, ax = plt.subplots(figsize=(6, 3.5))
for ratio in (1.0, 0.5, 0.1):
    traj = run(g, roles, s0, SimulationParams(epsilon=1.0, step=ratio))
    ax.plot(traj.upper_history, label=f"max e, h/eps={ratio}")
    ax.plot(traj.lower_history, "--", label=f"min e, h/eps={ratio}")
    print(f"h/eps={ratio}: {traj.steps_taken} steps")
ax.set_xscale("symlog")
ax.set_xlabel("step")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig("residual_bounds.png", dpi=120)
