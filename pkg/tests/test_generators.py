import pytest

from flowdecomp.errors import DomainError
from flowdecomp.generators import (corpus, cycle, dumbbell, grid, hypercube, path, random_regular,
                                   write_corpus)
from flowdecomp.io import read_edge_list


def test_hypercube():
    g = hypercube(3)
    assert g.vertex_count == 8
    assert g.edge_count == 12
    assert set(g.degrees().tolist()) == {3}
    for bad in (0, 17):
        with pytest.raises(DomainError):
            hypercube(bad)


def test_grid_and_path():
    g = grid(3, 4)
    assert g.vertex_count == 12
    assert g.edge_count == 17
    assert path(1).edge_count == 0
    assert path(4).edges.tolist() == [[0, 1], [1, 2], [2, 3]]
    with pytest.raises(DomainError):
        grid(0, 3)


def test_cycle():
    assert cycle(5).edge_count == 5
    with pytest.raises(DomainError):
        cycle(2)


def test_dumbbell_bridge():
    g = dumbbell(3)
    assert g.edge_count == 7
    assert g.edges[-1].tolist() == [2, 3]


def test_random_regular_is_seeded():
    first = random_regular(16, 3, seed=5)
    second = random_regular(16, 3, seed=5)
    assert first.edges.tolist() == second.edges.tolist()
    assert set(first.degrees().tolist()) == {3}


@pytest.mark.parametrize("n,d", [(7, 3), (4, 4), (0, 2)])
def test_random_regular_rejects_impossible_degrees(n, d):
    with pytest.raises(DomainError):
        random_regular(n, d)


def test_corpus_contents():
    instances = corpus()
    names = [name for name, _ in instances]
    assert len(instances) == 32
    assert len(set(names)) == len(names)
    assert "hypercube-7" in names and "dumbbell-8" in names
    assert "dumbbell-24" in names and "regular-48-4-s0" in names
    assert sum(1 for _, g in instances if g.vertex_count > 32) == 12

    small = corpus(small=True)
    assert len(small) == 20
    assert all(g.vertex_count <= 32 for _, g in small)


def test_corpus_seed_only_moves_random_graphs():
    names = [name for name, _ in corpus(seed=3)]
    assert "regular-8-3-s3" in names
    assert "grid-4x4" in names


def test_write_corpus(tmp_path):
    instances = [("cube", hypercube(3)), ("bar", dumbbell(3))]
    written = write_corpus(tmp_path / "corpus", instances)
    assert [p.name for p in written] == ["cube.el", "bar.el"]
    g = read_edge_list(written[0])
    assert g.edges.tolist() == hypercube(3).edges.tolist()
