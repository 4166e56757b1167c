import numpy as np
import pytest

from flowdecomp.errors import ContractError
from flowdecomp.flow_lp import solve_exact
from flowdecomp.generators import cycle, dumbbell, grid, hypercube, path
from flowdecomp.graph import Graph, NodeWeighting, ball, boundary, components, diameter
from flowdecomp.sweep import SWEEP_CONSTANT, heavy_core, scan_prefixes, sweep_cut


def _bridge_lengths():
    # dumbbell(3): six triangle edges, then the bridge 2 - 3 as edge 6
    return [0.0] * 6 + [1.0]


def test_heavy_core_with_zero_lengths_is_smallest_support_vertex(path3):
    a = NodeWeighting.from_mapping(3, {1: 1, 2: 1})
    assert heavy_core(path3.with_lengths([0.0, 0.0]), a, 1.0) == 1


def test_heavy_core_finds_the_heavy_center():
    star = Graph.from_edges(5, [(4, 0), (4, 1), (4, 2), (4, 3)])
    a = NodeWeighting(np.array([1, 1, 1, 1, 6]))
    metric = star.with_lengths([0.05] * 4)
    assert heavy_core(metric, a, 1.0) == 4


def test_heavy_core_absent_when_mass_is_spread(path3, unit):
    assert heavy_core(path3.with_lengths([10.0, 10.0]), unit(path3), 1.0) is None


def test_heavy_core_rejects_bad_input(path3, unit):
    with pytest.raises(ContractError):
        heavy_core(path3.with_lengths([1, 1]), unit(path3), 0.0)


def test_scan_prefixes_prefers_the_shorter_prefix_on_ties(path3, unit):
    scan = scan_prefixes(path3, unit(path3), np.array([2.0, 1.0, 0.0]))
    assert scan.order == (0, 1, 2)
    assert scan.prefix_length == 1
    assert scan.ratio == pytest.approx(1.5)
    assert scan.cut_sizes.tolist() == [1, 1]


def test_scan_prefixes_needs_cross_demand(path3):
    with pytest.raises(ContractError):
        scan_prefixes(path3, NodeWeighting.from_mapping(3, {0: 4}), np.zeros(3))


def test_sweep_on_an_edge(k2, unit):
    result = sweep_cut(k2.with_lengths([1.0]), unit(k2), {0}, 4.0)
    assert result.side == frozenset({0})
    assert result.sparsity == pytest.approx(1.0)
    assert result.boundary == (0,)
    assert result.denominator == pytest.approx(0.5)


def test_sweep_cuts_the_bridge(dumbbell3, unit):
    g = dumbbell3.with_lengths(_bridge_lengths())
    result = sweep_cut(g, unit(g), {3, 4, 5}, 2.0 / 3.0)
    # the winning prefix is the far triangle, so the core side comes back
    assert result.prefix_length == 3
    assert result.side == frozenset({3, 4, 5})
    assert result.boundary == (6,)
    assert result.sparsity == pytest.approx(1.0 / 3.0)
    assert result.min_mass == 3
    assert result.numerator == pytest.approx(1.0)
    assert result.denominator == pytest.approx(1.5)
    assert result.telescoped == pytest.approx(result.numerator)


def test_sweep_from_a_core_with_positive_diameter(unit):
    g = path(4).with_lengths([0.04, 0.04, 0.92])
    a = unit(g)
    phi = 4.0 / 3.0
    core = ball(g, 1, 1.0 / (4.0 * phi * a.total()))
    assert core == frozenset({0, 1, 2})
    assert diameter(g, core) == pytest.approx(0.08)
    result = sweep_cut(g, a, core, phi)
    assert result.prefix_length == 1
    assert result.side == frozenset({0, 1, 2})
    assert result.boundary == (2,)
    assert result.sparsity == pytest.approx(1.0)
    assert result.min_mass == 1
    assert result.pi.tolist() == pytest.approx([0.0, 0.0, 0.0, 0.92])
    assert result.numerator == pytest.approx(0.92)
    assert result.denominator == pytest.approx(0.69)
    assert result.telescoped == pytest.approx(result.numerator)


def test_sweep_preconditions(k2, dumbbell3, unit):
    metric = k2.with_lengths([1.0])
    with pytest.raises(ContractError, match="1/φ"):
        sweep_cut(metric, unit(k2), {0}, 1.0)
    with pytest.raises(ContractError, match="Σℓ"):
        sweep_cut(k2.with_lengths([2.0]), unit(k2), {0}, 4.0)
    with pytest.raises(ContractError):
        sweep_cut(k2, unit(k2), {0}, 4.0)
    with pytest.raises(ContractError, match="nonempty"):
        sweep_cut(metric, unit(k2), set(), 4.0)

    g = dumbbell3.with_lengths(_bridge_lengths())
    with pytest.raises(ContractError, match="A\\(K\\)"):
        sweep_cut(g, unit(g), {5}, 2.0 / 3.0)
    with pytest.raises(ContractError, match="diam"):
        sweep_cut(g, unit(g), {0, 1, 2, 3}, 2.0 / 3.0)


def test_sweep_boundary_matches_side(dumbbell3, unit):
    g = dumbbell3.with_lengths(_bridge_lengths())
    result = sweep_cut(g, unit(g), {3, 4, 5}, 2.0 / 3.0)
    assert list(result.boundary) == boundary(g, result.side)


def _instances():
    yield grid(3, 3)
    yield hypercube(3)
    yield dumbbell(4)
    yield cycle(7)
    yield grid(2, 5)
    yield path(6)


@pytest.mark.slow
def test_sweep_guarantee_on_lp_duals(rng):
    for g in _instances():
        assert len(components(g)) == 1
        for _ in range(3):
            mass = rng.integers(1, 4, size=g.vertex_count)
            x = int(rng.integers(g.vertex_count))
            rest = int(mass.sum() - mass[x])
            mass[x] = max(int(mass[x]), (rest + 1) // 2)
            a = NodeWeighting(mass)
            _, dual = solve_exact(g, a)
            phi = 1.0 / dual.objective
            result = sweep_cut(g.with_lengths(dual.lengths), a, {x}, phi)
            assert result.sparsity <= SWEEP_CONSTANT * phi * (1 + 1e-9)
            assert result.denominator >= 1.0 / (SWEEP_CONSTANT * phi) * (1 - 1e-9)
            assert 0 < len(result.side) < g.vertex_count
