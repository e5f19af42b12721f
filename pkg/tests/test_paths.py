import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minconsensus import (
    CycleDetected,
    EnumerationCapExceeded,
    NotConverged,
    Path,
    SimulationParams,
    StateVector,
    assign_roles,
    build_dag,
    build_graph,
    dijkstra_multi_source,
    extract_path,
    init_state,
    path_length,
    random_connected_graph,
    random_leaders,
    run,
)
from minconsensus.datasets import TEN_NODE_DISTANCES, ten_node_graph
from strategies import connected_instances, instance


def _solve(g, roles, tol=1e-9):
    traj = run(g, roles, init_state(g, roles), SimulationParams(tol=tol, record_every=10**9))
    assert traj.converged
    return traj.final


def test_ten_node_two_paths():
    g, roles = ten_node_graph()
    eq = _solve(g, roles)
    paths = extract_path(g, roles, eq, 10, "all")
    assert [p.nodes for p in paths] == [(10, 8, 3, 6, 5, 1), (10, 8, 9, 4, 6, 5, 1)]
    assert all(p.length == 6.0 for p in paths)
    single = extract_path(g, roles, eq, 10)
    assert single.nodes == (10, 8, 3, 6, 5, 1)


def test_leader_source_is_trivial():
    g, roles = ten_node_graph()
    eq = StateVector(TEN_NODE_DISTANCES)
    assert extract_path(g, roles, eq, 1) == Path((1,), 0.0)
    assert extract_path(g, roles, eq, 1, "all") == [Path((1,), 0.0)]


def test_not_converged(two_node):
    g, roles = two_node
    with pytest.raises(NotConverged):
        extract_path(g, roles, StateVector([0, 0]), 2)
    with pytest.raises(NotConverged):
        build_dag(g, roles, StateVector([0, 0]))


def test_enumeration_cap():
    # ladder of k diamonds has 2**k shortest paths
    k = 12
    edges, node = [], 1
    for _ in range(k):
        a, b, c = node, node + 1, node + 2
        edges += [(a, b, 1.0), (a, c, 1.0), (b, node + 3, 1.0), (c, node + 3, 1.0)]
        node += 3
    g = build_graph(node, edges)
    roles = assign_roles(g, {1})
    eq = _solve(g, roles)
    assert build_dag(g, roles, eq).count_paths(node) == 2**k
    with pytest.raises(EnumerationCapExceeded):
        extract_path(g, roles, eq, node, "all", cap=1000)
    assert len(extract_path(g, roles, eq, node, "all", cap=2**k)) == 2**k


def test_dag_small_cases(two_node, path3):
    g, roles = two_node
    assert build_dag(g, roles, StateVector([0, 1])).parents == (frozenset(), frozenset({1}))
    g, roles = path3
    assert build_dag(g, roles, StateVector([0, 1, 3])).parents == (frozenset(), {1}, {2})


def test_cycle_guard_on_loose_tolerance():
    # with tol large enough, 2 and 3 each accept the other as parent
    g = build_graph(3, [(1, 2, 1.0), (2, 3, 1e-3), (1, 3, 1.0)])
    roles = assign_roles(g, {1})
    eq = StateVector([0.0, 1.0, 1.0])
    with pytest.raises(CycleDetected):
        build_dag(g, roles, eq, tol=1e-3)


def test_path_text_round_trip():
    p = Path((10, 8, 3), 2.5)
    assert p.to_text() == "10 8 3\nlength 2.5\n"
    assert Path.from_text(p.to_text()) == p
    assert '"nodes": [10, 8, 3]' in p.to_json()


def test_path_length_requires_adjacency(path3):
    assert path_length(path3[0], [3, 2, 1]) == 3.0
    with pytest.raises(ValueError):
        path_length(path3[0], [1, 3])


@given(connected_instances(max_n=30))
@settings(max_examples=60, deadline=None)
def test_extracted_lengths_match_oracle(inst):
    g, roles = instance(*inst)
    eq = _solve(g, roles)
    d = dijkstra_multi_source(g, roles.leaders)
    dag = build_dag(g, roles, eq)
    for i in range(1, g.n + 1):
        p = extract_path(g, roles, eq, i)
        assert p.nodes[0] == i and p.nodes[-1] in roles.leaders
        assert abs(p.length - d[i]) <= 1e-9
        for q in extract_path(g, roles, eq, i, "all"):
            assert abs(q.length - d[i]) <= 1e-9
        if i in roles.leaders:
            assert not dag[i]


@given(connected_instances(max_n=20, integer_weights=True), st.sampled_from([0.5, 3.0, 7.25]))
@settings(max_examples=40, deadline=None)
def test_weight_scaling_covariance(inst, c):
    n, edges, leaders = inst
    g, roles = instance(n, edges, leaders)
    gs, _ = instance(n, [(i, j, c * w) for i, j, w in edges], leaders)
    eq, eqs = _solve(g, roles), _solve(gs, roles)
    np.testing.assert_allclose(eqs.values, c * eq.values, rtol=1e-12, atol=1e-9)
    assert build_dag(g, roles, eq).parents == build_dag(gs, roles, eqs).parents


def test_path_length_agrees_with_state_on_random_suite():
    for seed in range(200):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 101))
        g = random_connected_graph(n, seed)
        roles = assign_roles(g, random_leaders(n, seed))
        tol = 1e-9
        eq = _solve(g, roles, tol)
        dag = build_dag(g, roles, eq, tol)
        for i in range(1, n + 1):
            p = extract_path(g, roles, eq, i, tol=tol)
            assert abs(p.length - eq.values[i - 1]) <= n * tol
        assert all(dag[i] for i in roles.followers)
