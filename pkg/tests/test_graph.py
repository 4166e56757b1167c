import math

import numpy as np
import pytest

from flowdecomp.errors import ConfigurationError, ContractError, DomainError
from flowdecomp.generators import cycle, path
from flowdecomp.graph import (Cut, Graph, NodeWeighting, ball, boundary, components,
                              demand_distance_sum, demand_matrix, diameter, distance_matrix,
                              product_demand, shortest_path_lengths)


def test_graph_construction(k2):
    assert k2.vertex_count == 2
    assert k2.edge_count == 1
    assert list(k2.degrees()) == [1, 1]
    assert not k2.has_lengths
    assert list(k2.vertex_labels) == [0, 1]


def test_parallel_edges_have_distinct_ids():
    g = Graph.from_edges(2, [(0, 1), (0, 1)])
    assert g.edge_count == 2
    assert boundary(g, {0}) == [0, 1]


@pytest.mark.parametrize("pairs,lengths", [
    ([(0, 0)], None),
    ([(0, 5)], None),
    ([(0, 1)], [-1.0]),
    ([(0, 1)], [float("inf")]),
])
def test_graph_rejects_invalid_input(pairs, lengths):
    with pytest.raises(ValueError):
        Graph.from_edges(3, pairs, lengths)


def test_subgraph_keeps_root_labels():
    g = path(4)
    sub = g.subgraph({3, 1, 2})
    assert sub.vertex_count == 3
    assert sub.edges.tolist() == [[0, 1], [1, 2]]
    assert list(sub.vertex_labels) == [1, 2, 3]
    assert list(sub.edge_labels) == [1, 2]

    inner = sub.subgraph({1, 2})
    assert list(inner.vertex_labels) == [2, 3]
    assert inner.root_edges([0]) == [2]
    assert inner.root_vertices([0, 1]) == [2, 3]


def test_ball_on_path():
    g = path(3).with_lengths([0.3, 0.3])
    assert ball(g, 0, 0.3) == {0, 1}
    assert ball(g, 0, 0.0) == {0}
    assert ball(g, 0, 1.0) == {0, 1, 2}


def test_ball_on_cycle():
    g = cycle(4).with_lengths([0.25] * 4)
    assert ball(g, 0, 0.25) == {0, 1, 3}


def test_ball_zero_radius_follows_zero_length_edges():
    g = path(3).with_lengths([0.0, 0.5])
    assert ball(g, 0, 0.0) == {0, 1}


def test_ball_tolerates_rounding():
    g = path(3).with_lengths([0.1, 0.2])
    assert 2 in ball(g, 0, 0.3)


def test_ball_is_monotone(rng):
    g = cycle(9).with_lengths(rng.random(9))
    radii = sorted(rng.random(5))
    balls = [ball(g, 0, r) for r in radii]
    for small, large in zip(balls, balls[1:]):
        assert small <= large


def test_ball_errors(path3):
    with pytest.raises(ConfigurationError):
        ball(path3, 0, 1.0)
    with pytest.raises(DomainError):
        ball(path3.with_lengths([1, 1]), 0, -1.0)


def test_shortest_paths_multi_source():
    g = path(5).with_lengths([1, 1, 1, 1])
    dist = shortest_path_lengths(g, [0, 4])
    assert dist.tolist() == [0, 1, 2, 1, 0]


def test_shortest_paths_cutoff_marks_far_vertices():
    g = path(4).with_lengths([1, 1, 1])
    dist = shortest_path_lengths(g, [0], cutoff=1.5)
    assert dist[1] == 1
    assert math.isinf(dist[2]) and math.isinf(dist[3])


def test_diameter():
    g = path(3).with_lengths([1.0, 2.0])
    assert diameter(g, [0, 1, 2]) == pytest.approx(3.0)
    assert diameter(g, [1]) == 0.0


def test_distance_matrix():
    g = path(3).with_lengths([1.0, 2.0])
    assert distance_matrix(g).tolist() == [[0.0, 1.0, 3.0], [1.0, 0.0, 2.0], [3.0, 2.0, 0.0]]
    assert distance_matrix(g, [2]).tolist() == [[3.0, 2.0, 0.0]]
    assert distance_matrix(g, []).shape == (0, 3)
    split = Graph.from_edges(3, [(0, 1)], [0.5])
    assert np.isinf(distance_matrix(split, [0])[0, 2])
    with pytest.raises(ConfigurationError):
        distance_matrix(path(3))


def test_boundary_cases():
    triangle = cycle(3)
    assert boundary(triangle, set()) == []
    assert boundary(triangle, {0, 1, 2}) == []
    assert len(boundary(triangle, {0})) == 2


def test_boundary_is_symmetric(rng):
    g = cycle(7)
    for _ in range(10):
        side = {int(v) for v in np.flatnonzero(rng.random(7) < 0.5)}
        other = set(range(7)) - side
        assert boundary(g, side) == boundary(g, other)


def test_cut_of(path3):
    cut = Cut.of(path3, [1])
    assert cut.side == {1}
    assert cut.boundary == (0, 1)
    assert len(cut) == 2


def test_components(path3):
    assert components(path3) == [frozenset({0, 1, 2})]
    assert components(path3, [0]) == [frozenset({0}), frozenset({1, 2})]
    assert components(path3, [0, 1]) == [frozenset({0}), frozenset({1}), frozenset({2})]


def test_components_ordered_by_smallest_vertex():
    g = Graph.from_edges(4, [(1, 3), (0, 2)])
    assert components(g) == [frozenset({0, 2}), frozenset({1, 3})]


def test_node_weighting_validation():
    with pytest.raises(DomainError):
        NodeWeighting(np.array([0.5, 1.0]))
    with pytest.raises(DomainError):
        NodeWeighting(np.array([-1, 2]))


def test_node_weighting_queries():
    a = NodeWeighting.from_mapping(5, {1: 2, 3: 4})
    assert a.total() == 6
    assert a.support() == [1, 3]
    assert a.mass_of({0, 1}) == 2
    assert a.restrict({3}).mass.tolist() == [0, 0, 0, 4, 0]
    assert a.select({1, 3, 4}).mass.tolist() == [2, 4, 0]


def test_node_weighting_induced_from_root_labels():
    g = path(4)
    a = NodeWeighting(np.array([1, 2, 3, 4]))
    sub = g.subgraph({2, 3}).subgraph({1})
    assert a.induced(sub).mass.tolist() == [4]


def test_degree_weighting(q3):
    a = NodeWeighting.degrees(q3)
    assert a.total() == 24
    assert set(a.mass.tolist()) == {3}


def test_product_demand():
    a = NodeWeighting(np.array([1, 1, 2]))
    assert product_demand(a, 0, 2) == pytest.approx(0.5)
    assert product_demand(NodeWeighting(np.array([0, 1, 1])), 0, 1) == 0.0
    with pytest.raises(ContractError):
        product_demand(a, 1, 1)
    with pytest.raises(DomainError):
        product_demand(NodeWeighting.uniform(2, 0), 0, 1)


def test_product_demand_respects_weighting(rng):
    a = NodeWeighting(rng.integers(0, 5, size=8))
    demand = demand_matrix(a)
    assert np.all(demand.sum(axis=1) <= a.mass + 1e-12)
    assert np.allclose(np.diag(demand), 0.0)


def test_demand_distance_sum(k2):
    a = NodeWeighting.uniform(2)
    assert demand_distance_sum(k2.with_lengths([1.0]), a) == pytest.approx(0.5)
    assert demand_distance_sum(k2, a, [0.25]) == pytest.approx(0.125)


def test_demand_distance_sum_disconnected():
    g = Graph.from_edges(4, [(0, 1), (2, 3)], [1.0, 1.0])
    assert math.isinf(demand_distance_sum(g, NodeWeighting.uniform(4)))
