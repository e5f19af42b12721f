import sys
from pathlib import Path

import pytest

from minconsensus import assign_roles, build_graph

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def two_node():
    g = build_graph(2, [(1, 2, 1.0)])
    return g, assign_roles(g, {1})


@pytest.fixture
def path3():
    g = build_graph(3, [(1, 2, 1.0), (2, 3, 2.0)])
    return g, assign_roles(g, {1})
