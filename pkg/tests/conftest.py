import numpy as np
import pytest

from flowdecomp.generators import cycle, dumbbell, hypercube, path
from flowdecomp.graph import Graph, NodeWeighting


@pytest.fixture
def k2():
    """A single edge."""
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def path3():
    """The path 0 - 1 - 2."""
    return path(3)


@pytest.fixture
def cycle4():
    return cycle(4)


@pytest.fixture
def q3():
    """3-dimensional hypercube."""
    return hypercube(3)


@pytest.fixture
def dumbbell3():
    """Two triangles {0,1,2} and {3,4,5} joined by the bridge 2 - 3."""
    return dumbbell(3)


@pytest.fixture
def unit():
    """Factory for the all-ones weighting of a graph."""
    def make(g):
        return NodeWeighting.uniform(g.vertex_count)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_connected():
    """Factory for a seeded connected graph: a random tree plus up to n extra edges."""
    def make(generator, n):
        pairs = {(int(generator.integers(v)), v) for v in range(1, n)}
        for _ in range(int(generator.integers(0, n))):
            u, v = sorted(int(x) for x in generator.choice(n, size=2, replace=False))
            pairs.add((u, v))
        return Graph.from_edges(n, sorted(pairs))
    return make


def pytest_configure(config):
    """Add markers for different test categories."""
    config.addinivalue_line(
        "markers",
        "slow: marks tests that run full decompositions on larger instances"
    )
    config.addinivalue_line(
        "markers",
        "integration: marks tests that test integration between components"
    )
