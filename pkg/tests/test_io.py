import json

import numpy as np
import pytest

from flowdecomp.errors import ParseError
from flowdecomp.graph import Graph, NodeWeighting
from flowdecomp.io import (AUDIT_FORMAT, CUT_HEADER, REPORT_FORMAT, normalize, read_cut,
                           read_edge_list, read_json, read_node_weighting, write_cut,
                           write_edge_list, write_json, write_node_weighting)


def test_read_edge_list(tmp_path):
    path = tmp_path / "g.el"
    path.write_text("# a comment\n0 1\n\n1 2\n")
    g = read_edge_list(path)
    assert g.vertex_count == 3
    assert g.edges.tolist() == [[0, 1], [1, 2]]
    assert not g.has_lengths


def test_read_edge_list_with_lengths_and_vertex_count(tmp_path):
    path = tmp_path / "g.el"
    path.write_text("# vertices 5\n0 1 0.25\n3 1 0.75\n")
    g = read_edge_list(path)
    assert g.vertex_count == 5
    assert g.lengths.tolist() == [0.25, 0.75]


@pytest.mark.parametrize("text,line", [
    ("0 1\n1 x\n", 2),
    ("0 1\n1 2 0.5\n", 2),
    ("0 1\n2 2\n", 2),
    ("0 1 -1\n", 1),
    ("0 1 2 3\n", 1),
    ("-1 0\n", 1),
])
def test_read_edge_list_reports_line_numbers(tmp_path, text, line):
    path = tmp_path / "bad.el"
    path.write_text(text)
    with pytest.raises(ParseError) as exc_info:
        read_edge_list(path)
    assert exc_info.value.line_number == line
    assert f"bad.el:{line}:" in str(exc_info.value)


def test_read_edge_list_declared_count_too_small(tmp_path):
    path = tmp_path / "g.el"
    path.write_text("# vertices 2\n0 3\n")
    with pytest.raises(ParseError):
        read_edge_list(path)


def test_read_edge_list_missing_file(tmp_path):
    with pytest.raises(ParseError):
        read_edge_list(tmp_path / "missing.el")


def test_write_edge_list(tmp_path):
    g = Graph.from_edges(4, [(0, 1), (2, 3)], [0.5, 0.125])
    path = write_edge_list(g, tmp_path / "g.el", ["two edges"])
    lines = path.read_text().splitlines()
    assert lines == ["# two edges", "# vertices 4", "0 1 0.5", "2 3 0.125"]
    assert read_edge_list(path).vertex_count == 4


def test_node_weighting_file(tmp_path):
    path = tmp_path / "w.nw"
    path.write_text("0 3\n2 1\n")
    a = read_node_weighting(path, 4)
    assert a.mass.tolist() == [3, 0, 1, 0]

    out = write_node_weighting(a, tmp_path / "out.nw")
    assert out.read_text() == "0 3\n2 1\n"


@pytest.mark.parametrize("text", ["0 1.5\n", "7 1\n", "0 -2\n", "0\n"])
def test_node_weighting_file_errors(tmp_path, text):
    path = tmp_path / "w.nw"
    path.write_text(text)
    with pytest.raises(ParseError):
        read_node_weighting(path, 4)


def test_cut_file_matches_parallel_edges(tmp_path):
    g = Graph.from_edges(3, [(0, 1), (0, 1), (1, 2)])
    path = write_cut(g, [1, 2], tmp_path / "g.cut")
    assert path.read_text().splitlines() == [CUT_HEADER, "0 1", "1 2"]
    # The copy of 0-1 that is read back is the lowest id with those endpoints.
    assert read_cut(g, path) == [0, 2]


def test_cut_file_accepts_either_orientation(tmp_path):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    path = tmp_path / "g.cut"
    path.write_text(f"{CUT_HEADER}\n2 1\n")
    assert read_cut(g, path) == [1]


def test_cut_file_unknown_edge(tmp_path):
    g = Graph.from_edges(3, [(0, 1)])
    path = tmp_path / "g.cut"
    path.write_text("0 1\n0 1\n")
    with pytest.raises(ParseError) as exc_info:
        read_cut(g, path)
    assert exc_info.value.line_number == 2


def test_normalize():
    payload = {"a": np.float64(1.0 / 3.0), "b": {3, 1}, "c": float("inf"), "d": np.int64(4),
               "e": np.array([0.5, 1.5])}
    out = normalize(payload)
    assert out["a"] == pytest.approx(1.0 / 3.0, rel=1e-11)
    assert out["b"] == [1, 3]
    assert out["c"] == "inf"
    assert out["d"] == 4 and isinstance(out["d"], int)
    assert out["e"] == [0.5, 1.5]


def test_json_documents(tmp_path):
    path = write_json({"removed": [3, 1], "phi": 0.25}, tmp_path / "a.json")
    document = json.loads(path.read_text())
    assert document["format"] == AUDIT_FORMAT
    assert document["version"] == 1
    assert read_json(path)["removed"] == [3, 1]

    with pytest.raises(ParseError):
        read_json(path, REPORT_FORMAT)


def test_json_output_is_stable(tmp_path):
    first = write_json({"b": 1, "a": [0.1 + 0.2]}, tmp_path / "x.json").read_text()
    second = write_json({"a": [0.30000000000000004], "b": 1}, tmp_path / "y.json").read_text()
    assert first == second
