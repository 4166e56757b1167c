"""
Text formats: edge lists, node weightings, cut files and JSON reports.

Edge list: one ``u v`` pair per line with an optional third column holding
the edge length; ``#`` starts a comment. A ``# vertices N`` comment fixes the
vertex count (otherwise it is the largest id plus one).

Node weighting: one ``v mass`` pair per line; absent vertices get mass 0.
"""
import json
import math
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from .errors import ParseError
from .graph import Graph, NodeWeighting

PathLike = Union[str, Path]

CUT_HEADER = "# flowdecomp-cut v1"
AUDIT_FORMAT = "flowdecomp-audit"
REPORT_FORMAT = "flowdecomp-verify"
FORMAT_VERSION = 1


def _rows(path: PathLike) -> Iterable[Tuple[int, List[str], str]]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read file: {e}", str(path)) from e
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped:
            yield number, stripped.split(), stripped


def read_edge_list(path: PathLike) -> Graph:
    """
    Read a graph in edge-list format.

    Raises:
        ParseError: With the offending line number
    """
    pairs: List[Tuple[int, int]] = []
    lengths: List[float] = []
    declared: Optional[int] = None
    with_lengths: Optional[bool] = None
    for number, fields, line in _rows(path):
        if line.startswith("#"):
            tokens = line[1:].split()
            if len(tokens) == 2 and tokens[0] == "vertices":
                try:
                    declared = int(tokens[1])
                except ValueError:
                    raise ParseError(f"bad vertex count {tokens[1]!r}", str(path), number)
            continue
        if len(fields) not in (2, 3):
            raise ParseError(f"expected 'u v [length]', got {line!r}", str(path), number)
        if with_lengths is None:
            with_lengths = len(fields) == 3
        elif with_lengths != (len(fields) == 3):
            raise ParseError("either every edge has a length or none does", str(path), number)
        try:
            u, v = int(fields[0]), int(fields[1])
            if with_lengths:
                lengths.append(float(fields[2]))
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", str(path), number)
        if u < 0 or v < 0:
            raise ParseError("vertex ids must be nonnegative", str(path), number)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", str(path), number)
        if with_lengths and (lengths[-1] < 0 or not math.isfinite(lengths[-1])):
            raise ParseError("edge lengths must be finite and nonnegative", str(path), number)
        pairs.append((u, v))

    largest = max((max(p) for p in pairs), default=-1)
    n = largest + 1 if declared is None else declared
    if n <= largest:
        raise ParseError(f"'# vertices {declared}' is smaller than the largest id {largest}",
                         str(path))
    return Graph.from_edges(n, pairs, lengths if with_lengths else None)


def write_edge_list(g: Graph, path: PathLike, comments: Iterable[str] = ()) -> Path:
    """Write ``g`` (root ids) in edge-list format, lengths included when present."""
    path = Path(path)
    lines = [f"# {c}" for c in comments]
    lines.append(f"# vertices {g.vertex_count}")
    for e, (u, v) in enumerate(g.edges.tolist()):
        if g.lengths is None:
            lines.append(f"{u} {v}")
        else:
            lines.append(f"{u} {v} {_fmt(g.lengths[e])}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_node_weighting(path: PathLike, vertex_count: int) -> NodeWeighting:
    """Read a ``v mass`` file for a graph with ``vertex_count`` vertices."""
    mass = np.zeros(vertex_count, dtype=np.int64)
    for number, fields, line in _rows(path):
        if line.startswith("#"):
            continue
        if len(fields) != 2:
            raise ParseError(f"expected 'v mass', got {line!r}", str(path), number)
        try:
            v, value = int(fields[0]), float(fields[1])
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", str(path), number)
        if not 0 <= v < vertex_count:
            raise ParseError(f"vertex {v} out of range", str(path), number)
        if value < 0 or value != int(value):
            raise ParseError("mass must be a nonnegative integer", str(path), number)
        mass[v] = int(value)
    return NodeWeighting(mass)


def write_node_weighting(a: NodeWeighting, path: PathLike) -> Path:
    path = Path(path)
    lines = [f"{v} {a[v]}" for v in a.support()]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path


def write_cut(g: Graph, removed: Iterable[int], path: PathLike) -> Path:
    """Write removed edges (root ids of ``g``) as edge-list lines."""
    path = Path(path)
    lines = [CUT_HEADER]
    for e in sorted(int(e) for e in removed):
        u, v = g.edges[e].tolist()
        lines.append(f"{u} {v}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_cut(g: Graph, path: PathLike) -> List[int]:
    """
    Read a cut file and match each line to an edge id of ``g``.

    Parallel edges are matched to the smallest unused id with those endpoints.
    """
    available: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for e, (u, v) in enumerate(g.edges.tolist()):
        available[(min(u, v), max(u, v))].append(e)
    removed: List[int] = []
    for number, fields, line in _rows(path):
        if line.startswith("#"):
            continue
        if len(fields) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", str(path), number)
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", str(path), number)
        key = (min(u, v), max(u, v))
        if not available.get(key):
            raise ParseError(f"edge {u} {v} is not in the graph", str(path), number)
        removed.append(available[key].pop(0))
    return sorted(removed)


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def normalize(payload: Any) -> Any:
    """Round floats and convert numpy scalars so JSON output is byte-stable."""
    if isinstance(payload, dict):
        return {str(k): normalize(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple, set, frozenset)):
        items = sorted(payload) if isinstance(payload, (set, frozenset)) else payload
        return [normalize(v) for v in items]
    if isinstance(payload, np.ndarray):
        return normalize(payload.tolist())
    if isinstance(payload, (np.integer,)):
        return int(payload)
    if isinstance(payload, (float, np.floating)):
        value = float(payload)
        if not math.isfinite(value):
            return str(value)
        return float(_fmt(value))
    return payload


def write_json(payload: Dict[str, Any], path: PathLike, kind: str = AUDIT_FORMAT) -> Path:
    """Write a versioned JSON document with sorted keys."""
    path = Path(path)
    document = {"format": kind, "version": FORMAT_VERSION}
    document.update(normalize(payload))
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: PathLike, kind: str = AUDIT_FORMAT) -> Dict[str, Any]:
    try:
        document = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"cannot read JSON document: {e}", str(path)) from e
    if document.get("format") != kind or document.get("version") != FORMAT_VERSION:
        raise ParseError(f"not a {kind} v{FORMAT_VERSION} document", str(path))
    return document
