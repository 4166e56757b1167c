import csv
import json
import os
from pathlib import Path
from unittest.mock import patch

import pytest

from flowdecomp.cli import EXIT_ERROR, EXIT_INVARIANT, EXIT_OK, EXIT_PARSE, main
from flowdecomp.generators import dumbbell, hypercube
from flowdecomp.graph import Graph
from flowdecomp.io import CUT_HEADER, write_edge_list


@pytest.fixture
def q3_file(tmp_path):
    return write_edge_list(hypercube(3), tmp_path / "q3.el")


@pytest.fixture
def k2_file(tmp_path):
    return write_edge_list(Graph.from_edges(2, [(0, 1)]), tmp_path / "k2.el")


def test_decompose_writes_cut_and_audit(q3_file, tmp_path, capsys):
    with patch('sys.argv', ['flowdecomp', 'decompose', '--graph', str(q3_file), '--phi', '0.25']):
        assert main() == EXIT_OK
    assert (tmp_path / "q3.cut").read_text().splitlines() == [CUT_HEADER]
    audit = json.loads((tmp_path / "q3.audit.json").read_text())
    assert audit["format"] == "flowdecomp-audit"
    assert audit["removed"] == []
    assert "removed edges" in capsys.readouterr().out


def test_decompose_then_verify(q3_file, tmp_path):
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(q3_file), '--phi', '0.25']):
        assert main() == EXIT_OK
    audit = tmp_path / "q3.audit.json"
    with patch('sys.argv', ['flowdecomp', 'verify', '-g', str(q3_file), '--audit', str(audit)]):
        assert main() == EXIT_OK
    report = json.loads((tmp_path / "q3.verify.json").read_text())
    assert report["passed"] is True
    assert report["overhead"]["within_bound"] is True


def test_decompose_with_weights_and_out_dir(k2_file, tmp_path):
    weights = tmp_path / "w.nw"
    weights.write_text("0 1\n1 1\n")
    out = tmp_path / "out"
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(k2_file), '-w', str(weights),
                            '--phi', '4', '--solver', 'exact', '-o', str(out)]):
        assert main() == EXIT_OK
    assert (out / "k2.cut").read_text().splitlines() == [CUT_HEADER, "0 1"]


def test_verify_rejects_a_tampered_cut(k2_file, tmp_path, capsys):
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(k2_file), '--phi', '4',
                            '--solver', 'exact']):
        assert main() == EXIT_OK
    empty = tmp_path / "empty.cut"
    empty.write_text(CUT_HEADER + "\n")
    with patch('sys.argv', ['flowdecomp', 'verify', '-g', str(k2_file), '--cut', str(empty),
                            '--phi', '4', '--solver', 'exact']):
        assert main() == EXIT_INVARIANT
    assert "failed verification" in capsys.readouterr().err


def test_verify_detects_cut_audit_mismatch(k2_file, tmp_path):
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(k2_file), '--phi', '4']):
        assert main() == EXIT_OK
    empty = tmp_path / "empty.cut"
    empty.write_text(CUT_HEADER + "\n")
    with patch('sys.argv', ['flowdecomp', 'verify', '-g', str(k2_file), '--cut', str(empty),
                            '--audit', str(tmp_path / "k2.audit.json")]):
        assert main() == EXIT_INVARIANT


def test_verify_needs_phi_or_audit(k2_file, capsys):
    with patch('sys.argv', ['flowdecomp', 'verify', '-g', str(k2_file)]):
        assert main() == EXIT_ERROR
    assert "--phi or --audit" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.el"
    bad.write_text("0 1\n1 x\n")
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(bad), '--phi', '1']):
        assert main() == EXIT_PARSE
    assert "bad.el:2:" in capsys.readouterr().err


def test_nonpositive_phi(k2_file, capsys):
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(k2_file), '--phi', '0']):
        assert main() == EXIT_ERROR
    assert "--phi must be positive" in capsys.readouterr().err


def test_missing_required_argument():
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', 'x.el']):
        with pytest.raises(SystemExit) as exc_info:
            main()
    assert exc_info.value.code == 2


def test_invariant_violation_writes_failure_context(k2_file, tmp_path, mocker):
    from flowdecomp.errors import InvariantViolation
    mocker.patch("flowdecomp.cli.ed_multi",
                 side_effect=InvariantViolation("sweep sparsity too large", {"phi": 4.0}))
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(k2_file), '--phi', '4']):
        assert main() == EXIT_INVARIANT
    failure = json.loads((tmp_path / "k2.failure.json").read_text())
    assert failure["context"] == {"phi": 4.0}


@pytest.mark.integration
def test_bench_on_a_corpus_directory(tmp_path):
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    write_edge_list(Graph.from_edges(2, [(0, 1)]), corpus_dir / "k2.el")
    write_edge_list(dumbbell(3), corpus_dir / "dumbbell-3.el")
    out = tmp_path / "bench.csv"
    with patch('sys.argv', ['flowdecomp', 'bench', '--corpus', str(corpus_dir), '--csv', str(out),
                            '--phi-grid', '1', '0.5']):
        assert main() == EXIT_OK
    with out.open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 8
    assert {row["algorithm"] for row in rows} == {"ed", "baseline"}
    assert {row["verified"] for row in rows} == {"certified"}


def test_bench_on_an_empty_directory(tmp_path, capsys):
    with patch('sys.argv', ['flowdecomp', 'bench', '--corpus', str(tmp_path)]):
        assert main() == EXIT_ERROR
    assert "no .el files" in capsys.readouterr().err


def test_generate(tmp_path):
    out = tmp_path / "corpus"
    with patch('sys.argv', ['flowdecomp', 'generate', '--out-dir', str(out), '--small']):
        assert main() == EXIT_OK
    assert len(list(out.glob("*.el"))) == 20
    assert (out / "hypercube-3.el").exists()


def test_verify_without_audit_uses_the_exact_threshold_for_small_components(k2_file, tmp_path,
                                                                            capsys):
    # K2 routes its product demand at congestion 1/2 > 1/2.1
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(k2_file), '--phi', '2.1']):
        assert main() == EXIT_OK
    assert (tmp_path / "k2.cut").read_text().splitlines() == [CUT_HEADER, "0 1"]
    empty = tmp_path / "empty.cut"
    empty.write_text(CUT_HEADER + "\n")
    with patch('sys.argv', ['flowdecomp', 'verify', '-g', str(k2_file), '--cut', str(empty),
                            '--phi', '2.1']):
        assert main() == EXIT_INVARIANT
    assert "failed verification" in capsys.readouterr().err


def _decompose_and_verify(graph, out, phi, weights=None):
    extra = ['-w', str(weights)] if weights else []
    with patch('sys.argv', ['flowdecomp', 'decompose', '-g', str(graph), '--phi', phi,
                            '-o', str(out)] + extra):
        assert main() == EXIT_OK
    audit = out / f"{graph.stem}.audit.json"
    with patch('sys.argv', ['flowdecomp', 'verify', '-g', str(graph), '--audit', str(audit),
                            '-o', str(out)] + extra):
        assert main() == EXIT_OK
    return json.loads((out / f"{graph.stem}.verify.json").read_text())


@pytest.mark.slow
@pytest.mark.integration
@pytest.mark.skipif(not os.path.exists("tests/test_files"),
                    reason="Generated corpus files not available")
def test_decompose_and_verify_the_generated_corpus(tmp_path):
    graphs = sorted(Path("tests/test_files").glob("*.el"))
    assert len(graphs) == 20
    for graph in graphs:
        report = _decompose_and_verify(graph, tmp_path / graph.stem, '0.25')
        assert report["passed"] is True, graph.name
        assert report["overhead"]["within_bound"] is True, graph.name


@pytest.mark.slow
@pytest.mark.integration
@pytest.mark.skipif(not os.path.exists("tests/test_files/dumbbell-5.skewed.nw"),
                    reason="Generated weighting file not available")
def test_decompose_and_verify_with_a_skewed_weighting(tmp_path):
    graph = Path("tests/test_files/dumbbell-5.el")
    report = _decompose_and_verify(graph, tmp_path, '0.5', "tests/test_files/dumbbell-5.skewed.nw")
    assert report["passed"] is True
    audit = json.loads((tmp_path / "dumbbell-5.audit.json").read_text())
    assert audit["total_mass"] == 25
    # the bridge between the two cliques is the last edge
    assert audit["removed"] == [20]
