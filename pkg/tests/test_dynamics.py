import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brute import residuals_loop
from minconsensus import (
    LengthMismatch,
    NodeIdOutOfRange,
    NonFiniteState,
    NotConnected,
    SimulationParams,
    StateVector,
    assign_roles,
    build_graph,
    child_set,
    diagnostics,
    dijkstra_multi_source,
    init_state,
    parent_set,
    random_connected_graph,
    random_leaders,
    residual,
    residuals,
    run,
    step,
)
from minconsensus.datasets import TEN_NODE_DISTANCES, ten_node_graph
from strategies import connected_instances, instance


# -- init_state ---------------------------------------------------------------

def test_init_zeros(path3):
    g, roles = path3
    s = init_state(g, roles)
    assert s.values.tolist() == [0.0, 0.0, 0.0] and s.time == 0.0


def test_init_uniform_seeded(path3):
    g, roles = path3
    a = init_state(g, roles, "uniform", low=0, high=10, seed=42)
    b = init_state(g, roles, "uniform", low=0, high=10, seed=42)
    assert a.values[0] == 0.0
    assert ((a.values[1:] >= 0) & (a.values[1:] <= 10)).all()
    assert np.array_equal(a.values, b.values)
    with pytest.raises(ValueError):
        init_state(g, roles, "uniform")


def test_init_uniform_default_range(path3):
    g, roles = path3
    s = init_state(g, roles, "uniform", seed=1)
    assert (s.values <= 3 * g.max_weight).all()


def test_init_explicit(path3):
    g, roles = path3
    assert init_state(g, roles, "explicit", values=[5, 1, 2]).values.tolist() == [5.0, 1.0, 2.0]
    with pytest.raises(LengthMismatch):
        init_state(g, roles, "explicit", values=[1, 2])


# -- residuals and arg-sets ---------------------------------------------------

def test_residual_examples(two_node):
    g, roles = two_node
    assert residual(g, roles, StateVector([0, 0]), 2) == 1.0
    assert residual(g, roles, StateVector([0, 1]), 2) == 0.0
    assert residual(g, roles, StateVector([7, 0]), 1) == 0.0
    with pytest.raises(NodeIdOutOfRange):
        residual(g, roles, StateVector([0, 0]), 3)


@given(connected_instances(max_n=15), st.integers(0, 2**32 - 1))
def test_residuals_match_longhand(inst, seed):
    g, roles = instance(*inst)
    x = np.random.default_rng(seed).uniform(-5, 20, g.n)
    expected = residuals_loop(g.n, g.edges(), roles.leaders, x.tolist())
    assert residuals(g, roles, x).tolist() == expected
    assert [residual(g, roles, StateVector(x), i) for i in range(1, g.n + 1)] == expected


def test_diagnostics_equilibrium():
    g, roles = ten_node_graph()
    d = diagnostics(g, roles, StateVector(TEN_NODE_DISTANCES))
    assert d.upper == d.lower == 0.0
    assert d.upper_set == d.lower_set == tuple(range(1, 11))


def test_diagnostics_two_node(two_node):
    d = diagnostics(*two_node, StateVector([0, 0]))
    assert (d.upper, d.upper_set, d.lower, d.lower_set) == (1.0, (2,), 0.0, (1,))


def test_diagnostics_three_node_ties():
    g = build_graph(3, [(1, 2, 1.0), (2, 3, 1.0)])
    roles = assign_roles(g, {1})
    d = diagnostics(g, roles, StateVector([0, 0, 0]))
    assert d.residuals.tolist() == [0.0, 1.0, 1.0]
    assert d.upper_set == (2, 3)


def test_parent_and_child_sets(two_node):
    g, roles = two_node
    eq = StateVector([0, 1])
    assert parent_set(g, roles, eq, 1) == frozenset()
    assert parent_set(g, roles, eq, 2) == {1}
    assert child_set(g, roles, eq, 1) == {2}
    assert child_set(g, roles, eq, 2) == frozenset()
    with pytest.raises(NodeIdOutOfRange):
        parent_set(g, roles, eq, 0)


def test_ten_node_parent_structure():
    g, roles = ten_node_graph()
    eq = StateVector(TEN_NODE_DISTANCES)
    assert parent_set(g, roles, eq, 10) == {8}
    assert parent_set(g, roles, eq, 8) == {3, 9}
    assert parent_set(g, roles, eq, 3) == {6}
    assert parent_set(g, roles, eq, 9) == {4}
    assert child_set(g, roles, eq, 6) == {3, 4}


def test_all_leader_graph_has_no_children():
    g = build_graph(3, [(1, 2, 1.0), (2, 3, 1.0)])
    roles = assign_roles(g, {1, 2, 3})
    s = StateVector([4.0, 0.0, 9.0])
    assert all(child_set(g, roles, s, i) == frozenset() for i in (1, 2, 3))


@given(connected_instances(max_n=20, integer_weights=True), st.integers(0, 2**32 - 1))
def test_child_set_inverts_parent_set(inst, seed):
    g, roles = instance(*inst)
    # small integers make ties common
    s = StateVector(np.random.default_rng(seed).integers(0, 4, g.n).astype(float))
    for i in range(1, g.n + 1):
        for k in range(1, g.n + 1):
            assert (k in child_set(g, roles, s, i)) == (i in parent_set(g, roles, s, k))


# -- step ---------------------------------------------------------------------

def test_step_full_gain_is_bellman(two_node):
    g, roles = two_node
    s = step(g, roles, StateVector([0, 5]), SimulationParams(epsilon=1e-4))
    assert s.values.tolist() == [0.0, 1.0]
    assert s.time == 1e-4


def test_step_half_gain(two_node):
    g, roles = two_node
    s = step(g, roles, StateVector([0, 0]), SimulationParams(epsilon=1e-4, step=5e-5))
    assert s.values.tolist() == [0.0, 0.5]


def test_step_is_synchronous():
    g = build_graph(3, [(1, 2, 1.0), (2, 3, 1.0)])
    roles = assign_roles(g, {1})
    s = step(g, roles, StateVector([0, 10, 10]), SimulationParams(epsilon=1.0))
    # node 3 sees node 2's old value 10, not the new value 1
    assert s.values.tolist() == [0.0, 1.0, 11.0]


def test_zero_bias_hook_is_plain_min_consensus():
    g = build_graph(3, [(1, 2, 1.0), (2, 3, 5.0)])
    roles = assign_roles(g, {1})
    x = np.array([2.0, 6.0, 4.0])
    s = step(g, roles, StateVector(x), SimulationParams(epsilon=1.0, step=0.25), bias=False)
    # eps*dx_i = -x_i + min_j x_j, no weights
    expected = [2.0, 6.0 + 0.25 * (min(2.0, 4.0) - 6.0), 4.0 + 0.25 * (6.0 - 4.0)]
    assert s.values.tolist() == expected
    traj = run(g, roles, StateVector(x), SimulationParams(epsilon=1.0, step=0.5), bias=False)
    assert traj.converged
    np.testing.assert_allclose(traj.final.values, [2.0, 2.0, 2.0], atol=1e-9)


def test_step_rejects_nonfinite(two_node):
    g, roles = two_node
    with pytest.raises(NonFiniteState):
        step(g, roles, StateVector([0, np.inf]), SimulationParams(epsilon=1.0, step=0.5))


def test_params_validation():
    with pytest.raises(ValueError):
        SimulationParams(epsilon=1e-4, step=2e-4)
    with pytest.raises(ValueError):
        SimulationParams(epsilon=0.0)
    with pytest.raises(ValueError):
        SimulationParams(max_steps=0)
    assert SimulationParams(epsilon=3e-6).step == 3e-6


# -- run ----------------------------------------------------------------------

def test_run_ten_node_matches_dijkstra():
    g, roles = ten_node_graph()
    traj = run(g, roles, init_state(g, roles), SimulationParams(epsilon=1e-6))
    assert traj.converged
    d = dijkstra_multi_source(g, roles.leaders)
    np.testing.assert_allclose(traj.final.values, d.dist, atol=1e-9)
    times = [s.time for s, _ in traj.snapshots]
    assert np.allclose(np.diff(times), 1e-6)


def test_run_all_leaders_is_static():
    g = build_graph(3, [(1, 2, 1.0), (2, 3, 1.0)])
    roles = assign_roles(g, {1, 2, 3})
    traj = run(g, roles, StateVector([1.0, 2.0, 3.0]), SimulationParams())
    assert traj.converged and traj.steps_taken == 0
    assert (traj.final_diagnostics.residuals == 0).all()


def test_run_random_graph_matches_dijkstra():
    g = random_connected_graph(50, seed=3)
    roles = assign_roles(g, random_leaders(50, 3, k=2))
    params = SimulationParams()
    traj = run(g, roles, init_state(g, roles), params)
    d = dijkstra_multi_source(g, roles.leaders)
    assert traj.converged
    assert np.max(np.abs(traj.final.values - d.dist)) <= 10 * params.tol


def test_run_disconnected():
    g = build_graph(3, [(1, 2, 1.0)])
    with pytest.raises(NotConnected):
        run(g, assign_roles(g, {1}), StateVector([0, 0, 0]), SimulationParams())


def test_run_not_converged_flag(path3):
    g, roles = path3
    traj = run(g, roles, init_state(g, roles), SimulationParams(max_steps=1))
    assert not traj.converged and traj.steps_taken == 1


def test_record_stride():
    g = random_connected_graph(20, seed=9)
    roles = assign_roles(g, {1})
    p = SimulationParams(step=5e-5, record_every=7)
    traj = run(g, roles, init_state(g, roles), p)
    ks = [round(s.time / p.step) for s, _ in traj.snapshots]
    assert ks[:-1] == list(range(0, 7 * (len(ks) - 1), 7))
    assert ks[-1] == traj.steps_taken
    assert len(traj.upper_history) == traj.steps_taken + 1


def test_workers_bit_identical():
    g = random_connected_graph(80, seed=4)
    roles = assign_roles(g, random_leaders(80, 4, k=3))
    s0 = init_state(g, roles, "uniform", seed=4)
    a = run(g, roles, s0, SimulationParams(step=5e-5))
    b = run(g, roles, s0, SimulationParams(step=5e-5, workers=3))
    assert a.to_csv() == b.to_csv()


def test_exports():
    g, roles = ten_node_graph()
    traj = run(g, roles, init_state(g, roles), SimulationParams(epsilon=1e-6))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t," + ",".join(f"x_{i}" for i in range(1, 11)) + ",e_upper,e_lower"
    assert len(lines) == len(traj.snapshots) + 1
    records = [json.loads(s) for s in traj.diagnostics_jsonl().splitlines()]
    assert records[-1]["upper_set"] == list(range(1, 11))
    assert records[0]["upper_set"] == sorted(records[0]["upper_set"])


# -- properties of the protocol -----------------------------------------------

def _random_instance(seed, max_n=100):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, max_n + 1))
    g = random_connected_graph(n, seed)
    roles = assign_roles(g, random_leaders(n, seed, k=int(rng.integers(1, 4))))
    return g, roles


@pytest.mark.parametrize("ratio", [1.0, 0.5, 0.1])
def test_residual_bounds_are_monotone(ratio):
    for seed in range(40):
        g, roles = _random_instance(seed, max_n=60)
        s0 = init_state(g, roles, "uniform", seed=seed)
        traj = run(g, roles, s0, SimulationParams(epsilon=1.0, step=ratio, max_steps=20000))
        assert traj.converged
        assert np.all(np.diff(traj.upper_history) <= 1e-12)
        assert np.all(np.diff(traj.lower_history) >= -1e-12)
        # sandwich: every residual stays inside its initial bounds
        for _, d in traj.snapshots:
            assert d.residuals.max() <= traj.upper_history[0] + 1e-12
            assert d.residuals.min() >= traj.lower_history[0] - 1e-12


def test_state_bound_and_leader_stasis():
    for seed in range(40):
        g, roles = _random_instance(seed, max_n=60)
        s0 = init_state(g, roles, "explicit", values=np.random.default_rng(seed).uniform(0, 50, g.n))
        traj = run(g, roles, s0, SimulationParams(epsilon=1.0, step=0.5))
        n = g.n
        leaders = sorted(roles.leaders)
        bound = (-traj.lower_history[0] * (n - 1)
                 + s0.values[np.array(leaders) - 1].max()
                 + (n - 1) * g.max_weight)
        assert np.all(traj.max_state_history <= bound)
        for s, _ in traj.snapshots:
            assert np.array_equal(s.values[np.array(leaders) - 1], s0.values[np.array(leaders) - 1])


@given(connected_instances(max_n=40), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_converges_to_oracle_from_any_start(inst, seed):
    g, roles = instance(*inst)
    s0 = init_state(g, roles, "uniform", seed=seed)
    traj = run(g, roles, s0, SimulationParams(tol=1e-9))
    assert traj.converged
    d = dijkstra_multi_source(g, roles.leaders)
    assert np.max(np.abs(traj.final.values - d.dist)) <= 1e-6


def test_runs_are_deterministic():
    g, roles = _random_instance(17)
    s0 = init_state(g, roles, "uniform", seed=17)
    p = SimulationParams(step=3e-5)
    assert run(g, roles, s0, p).to_csv() == run(g, roles, s0, p).to_csv()
