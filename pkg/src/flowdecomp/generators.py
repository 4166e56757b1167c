"""
Deterministic benchmark instances.

Random graphs come from networkx seeded with an integer, which drives
Python's Mersenne Twister, so corpora are identical on every platform.
"""
import logging
from itertools import combinations
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import networkx as nx

from .errors import DomainError
from .graph import Graph
from .io import write_edge_list

logger = logging.getLogger(__name__)

MAX_HYPERCUBE_DIM = 16


def hypercube(dim: int) -> Graph:
    """
    The dim-dimensional hypercube; vertex i is adjacent to i XOR 2^b.

    Raises:
        DomainError: If dim is outside [1, 16]
    """
    if not 1 <= dim <= MAX_HYPERCUBE_DIM:
        raise DomainError(f"hypercube dimension must lie in [1, {MAX_HYPERCUBE_DIM}]")
    n = 1 << dim
    pairs = [(i, i ^ (1 << b)) for i in range(n) for b in range(dim) if i < i ^ (1 << b)]
    return Graph.from_edges(n, pairs)


def grid(rows: int, cols: int) -> Graph:
    """rows × cols grid; vertex r·cols + c."""
    if rows < 1 or cols < 1:
        raise DomainError("grid dimensions must be positive")
    pairs = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                pairs.append((v, v + 1))
            if r + 1 < rows:
                pairs.append((v, v + cols))
    return Graph.from_edges(rows * cols, pairs)


def random_regular(n: int, d: int, seed: int = 0) -> Graph:
    """
    Uniform-ish random d-regular simple graph on n vertices.

    Raises:
        DomainError: If n·d is odd or d >= n
    """
    if n < 1 or d < 0:
        raise DomainError("random_regular needs n >= 1 and d >= 0")
    if (n * d) % 2:
        raise DomainError(f"no {d}-regular graph on {n} vertices: n·d is odd")
    if d >= n:
        raise DomainError(f"no simple {d}-regular graph on {n} vertices")
    try:
        graph = nx.random_regular_graph(d, n, seed=seed)
    except nx.NetworkXError as e:
        raise DomainError(str(e)) from e
    pairs = sorted((min(u, v), max(u, v)) for u, v in graph.edges())
    return Graph.from_edges(n, pairs)


def dumbbell(k: int) -> Graph:
    """Two k-cliques joined by one bridge between vertex k-1 and vertex k."""
    if k < 1:
        raise DomainError("dumbbell needs k >= 1")
    pairs = list(combinations(range(k), 2))
    pairs += [(u + k, v + k) for u, v in combinations(range(k), 2)]
    pairs.append((k - 1, k))
    return Graph.from_edges(2 * k, pairs)


def path(n: int) -> Graph:
    return grid(1, n)


def cycle(n: int) -> Graph:
    if n < 3:
        raise DomainError("cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def corpus(seed: int = 0, small: bool = False) -> List[Tuple[str, Graph]]:
    """
    Named benchmark instances: hypercubes, grids, random regular graphs and dumbbells.

    Args:
        seed: Seed of the random regular graphs
        small: Keep only instances with at most 32 vertices
    """
    instances: List[Tuple[str, Graph]] = []
    for dim in range(3, 8):
        instances.append((f"hypercube-{dim}", hypercube(dim)))
    for rows, cols in [(2, 2), (2, 4), (3, 3), (4, 4), (4, 6), (6, 6), (8, 8)]:
        instances.append((f"grid-{rows}x{cols}", grid(rows, cols)))
    for n in (8, 16, 32, 40, 48, 64):
        for d in (3, 4):
            instances.append((f"regular-{n}-{d}-s{seed}", random_regular(n, d, seed)))
    for k in (3, 4, 5, 6, 7, 8, 20, 24):
        instances.append((f"dumbbell-{k}", dumbbell(k)))
    if small:
        instances = [(name, g) for name, g in instances if g.vertex_count <= 32]
    return instances


def write_corpus(directory: Union[str, Path], instances: Iterable[Tuple[str, Graph]]) -> List[Path]:
    """Write each instance as ``<name>.el`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, g in instances:
        written.append(write_edge_list(g, directory / f"{name}.el", [name]))
    logger.info("wrote %d instances to %s", len(written), directory)
    return written
