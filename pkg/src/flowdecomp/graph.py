"""
Graph substrate: unit-capacity multigraphs, node-weightings, shortest-path
balls, cuts and connected components.

Vertex ids are dense integers ``0..n-1`` and every edge (including each copy
of a parallel edge) has its own id. Induced subgraphs remember the ids their
vertices and edges carry in the root graph, so results computed deep inside a
recursion can always be reported against the input graph.
"""
import heapq
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .errors import ConfigurationError, ContractError, DomainError

logger = logging.getLogger(__name__)

DISTANCE_TOLERANCE = 1e-9


def within(distance: float, radius: float, tolerance: float = DISTANCE_TOLERANCE) -> bool:
    """Tolerant ``distance <= radius`` used by every ball membership test."""
    return distance <= radius * (1.0 + tolerance)


@dataclass(frozen=True, eq=False)
class Graph:
    """
    An undirected multigraph with unit edge capacities.

    Args:
        vertex_count: Number of vertices n
        edges: Integer array of shape (m, 2); row e holds the endpoints of edge e
        lengths: Optional nonnegative edge lengths (the dual LP's metric)
        vertex_labels: Root-graph id of every local vertex (identity if omitted)
        edge_labels: Root-graph id of every local edge (identity if omitted)

    Raises:
        ValueError: On self-loops, out-of-range endpoints or negative lengths
    """

    vertex_count: int
    edges: np.ndarray
    lengths: Optional[np.ndarray] = None
    vertex_labels: Optional[np.ndarray] = field(default=None, repr=False)
    edge_labels: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        n = int(self.vertex_count)
        if n < 0:
            raise ValueError("vertex_count must be nonnegative")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValueError(f"edge endpoint out of range for {n} vertices")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", edges)

        if self.lengths is not None:
            lengths = np.asarray(self.lengths, dtype=np.float64).reshape(-1)
            if lengths.shape[0] != edges.shape[0]:
                raise ValueError("lengths must have one entry per edge")
            if np.any(lengths < 0) or not np.all(np.isfinite(lengths)):
                raise ValueError("edge lengths must be finite and nonnegative")
            object.__setattr__(self, "lengths", lengths)

        labels = (np.arange(n, dtype=np.int64) if self.vertex_labels is None
                  else np.asarray(self.vertex_labels, dtype=np.int64))
        edge_labels = (np.arange(edges.shape[0], dtype=np.int64) if self.edge_labels is None
                       else np.asarray(self.edge_labels, dtype=np.int64))
        object.__setattr__(self, "vertex_labels", labels)
        object.__setattr__(self, "edge_labels", edge_labels)

    @classmethod
    def from_edges(cls, vertex_count: int, pairs: Iterable[Tuple[int, int]],
                   lengths: Optional[Sequence[float]] = None) -> "Graph":
        """Build a graph from an iterable of ``(u, v)`` pairs."""
        edges = np.array(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(vertex_count, edges, None if lengths is None else np.asarray(lengths, float))

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @property
    def has_lengths(self) -> bool:
        return self.lengths is not None

    @cached_property
    def adjacency(self) -> List[List[Tuple[int, int]]]:
        """Per-vertex list of ``(neighbor, edge id)`` pairs."""
        adj: List[List[Tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for e, (u, v) in enumerate(self.edges.tolist()):
            adj[u].append((v, e))
            adj[v].append((u, e))
        return adj

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.reshape(-1), minlength=self.vertex_count).astype(np.int64)

    def with_lengths(self, lengths: Sequence[float]) -> "Graph":
        """Return the same graph carrying the given edge lengths."""
        return Graph(self.vertex_count, self.edges, np.asarray(lengths, dtype=np.float64),
                     self.vertex_labels, self.edge_labels)

    def without_lengths(self) -> "Graph":
        return Graph(self.vertex_count, self.edges, None, self.vertex_labels, self.edge_labels)

    def subgraph(self, vertices: Iterable[int]) -> "Graph":
        """
        Induced subgraph G[S] with local ids assigned in ascending order of ``vertices``.

        The returned graph's labels point at the root graph, not at ``self``.
        """
        keep = np.array(sorted(set(int(v) for v in vertices)), dtype=np.int64)
        local = np.full(self.vertex_count, -1, dtype=np.int64)
        local[keep] = np.arange(keep.shape[0])
        inside = (local[self.edges[:, 0]] >= 0) & (local[self.edges[:, 1]] >= 0)
        sub_edges = local[self.edges[inside]]
        sub_lengths = None if self.lengths is None else self.lengths[inside]
        return Graph(keep.shape[0], sub_edges, sub_lengths,
                     self.vertex_labels[keep], self.edge_labels[np.flatnonzero(inside)])

    def root_vertices(self, local: Iterable[int]) -> List[int]:
        return sorted(int(self.vertex_labels[v]) for v in local)

    def root_edges(self, local: Iterable[int]) -> List[int]:
        return sorted(int(self.edge_labels[e]) for e in local)

    def __len__(self) -> int:
        return self.vertex_count


@dataclass(frozen=True, eq=False)
class NodeWeighting:
    """
    Integral nonnegative vertex mass A.

    Args:
        mass: One nonnegative integer per vertex
    """

    mass: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.mass)
        if raw.size and not np.all(np.equal(np.mod(raw, 1), 0)):
            raise DomainError("node-weighting values must be integral")
        mass = raw.astype(np.int64).reshape(-1)
        if np.any(mass < 0):
            raise DomainError("node-weighting values must be nonnegative")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def degrees(cls, g: Graph) -> "NodeWeighting":
        """The degree weighting A = deg_G."""
        return cls(g.degrees())

    @classmethod
    def uniform(cls, vertex_count: int, value: int = 1) -> "NodeWeighting":
        return cls(np.full(vertex_count, value, dtype=np.int64))

    @classmethod
    def from_mapping(cls, vertex_count: int, masses: Mapping[int, int]) -> "NodeWeighting":
        """Build a weighting; vertices absent from ``masses`` get mass 0."""
        mass = np.zeros(vertex_count, dtype=np.int64)
        for v, value in masses.items():
            if not 0 <= v < vertex_count:
                raise DomainError(f"vertex {v} out of range for {vertex_count} vertices")
            mass[v] = value
        return cls(mass)

    def __len__(self) -> int:
        return int(self.mass.shape[0])

    def __getitem__(self, v: int) -> int:
        return int(self.mass[v])

    def total(self) -> int:
        """|A|."""
        return int(self.mass.sum())

    def support(self) -> List[int]:
        """supp(A) in ascending order."""
        return [int(v) for v in np.flatnonzero(self.mass)]

    def mass_of(self, vertices: Iterable[int]) -> int:
        """A(S)."""
        idx = np.fromiter((int(v) for v in vertices), dtype=np.int64)
        return int(self.mass[idx].sum()) if idx.size else 0

    def restrict(self, vertices: Iterable[int]) -> "NodeWeighting":
        """A_S: same vertex set, zero outside S."""
        mass = np.zeros_like(self.mass)
        idx = np.fromiter((int(v) for v in vertices), dtype=np.int64)
        mass[idx] = self.mass[idx]
        return NodeWeighting(mass)

    def induced(self, g: Graph) -> "NodeWeighting":
        """Weighting on ``g``, a subgraph of the root graph this weighting lives on."""
        return NodeWeighting(self.mass[g.vertex_labels])

    def select(self, vertices: Iterable[int]) -> "NodeWeighting":
        """Weighting on ``G[vertices]`` as built by :meth:`Graph.subgraph`."""
        keep = sorted(set(int(v) for v in vertices))
        return NodeWeighting(self.mass[keep])


@dataclass(frozen=True)
class Cut:
    """A vertex side S with its boundary edge ids δ(S)."""

    side: FrozenSet[int]
    boundary: Tuple[int, ...]

    @classmethod
    def of(cls, g: Graph, side: Iterable[int]) -> "Cut":
        side = frozenset(int(v) for v in side)
        return cls(side, tuple(boundary(g, side)))

    def __len__(self) -> int:
        return len(self.boundary)


def _require_lengths(g: Graph) -> np.ndarray:
    if g.lengths is None:
        raise ConfigurationError("operation needs edge lengths; assign them with Graph.with_lengths")
    return g.lengths


def shortest_path_lengths(g: Graph, sources: Iterable[int],
                          cutoff: Optional[float] = None) -> np.ndarray:
    """
    Multi-source shortest-path distances under the graph's lengths.

    Binary-heap label-setting search; length-0 edges are allowed.

    Args:
        g: Graph with lengths
        sources: Vertices at distance 0
        cutoff: Stop once every remaining label exceeds this radius

    Returns:
        np.ndarray: Distance per vertex, ``inf`` where unreached
    """
    lengths = _require_lengths(g)
    dist = np.full(g.vertex_count, np.inf)
    heap: List[Tuple[float, int]] = []
    for s in sources:
        dist[s] = 0.0
        heap.append((0.0, int(s)))
    heapq.heapify(heap)
    adj = g.adjacency
    settled = np.zeros(g.vertex_count, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u]:
            continue
        if cutoff is not None and not within(d, cutoff):
            break
        settled[u] = True
        for v, e in adj[u]:
            candidate = d + lengths[e]
            if candidate < dist[v]:
                dist[v] = candidate
                heapq.heappush(heap, (candidate, v))
    if cutoff is not None:
        dist[~settled] = np.inf
    return dist


def shortest_path_tree(g: Graph, source: int,
                       lengths: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """
    Single-source shortest-path tree.

    Returns:
        Tuple of (distances, parent arc per vertex, settle order). Arc ``2e``
        runs from ``edges[e, 0]`` to ``edges[e, 1]`` and ``2e + 1`` the other
        way; the source and unreached vertices have parent arc -1.
    """
    lengths = _require_lengths(g) if lengths is None else lengths
    dist = np.full(g.vertex_count, np.inf)
    parent = np.full(g.vertex_count, -1, dtype=np.int64)
    dist[source] = 0.0
    heap: List[Tuple[float, int]] = [(0.0, int(source))]
    settled = np.zeros(g.vertex_count, dtype=bool)
    order: List[int] = []
    adj = g.adjacency
    edges = g.edges
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        order.append(u)
        for v, e in adj[u]:
            candidate = d + lengths[e]
            if candidate < dist[v]:
                dist[v] = candidate
                parent[v] = 2 * e if edges[e, 0] == u else 2 * e + 1
                heapq.heappush(heap, (candidate, v))
    return dist, parent, order


def distance_matrix(g: Graph, sources: Optional[Sequence[int]] = None) -> np.ndarray:
    """Rows of single-source distances, one per source (all vertices by default)."""
    sources = range(g.vertex_count) if sources is None else sources
    return np.array([shortest_path_lengths(g, [s]) for s in sources]).reshape(-1, g.vertex_count)


def ball(g: Graph, center: int, radius: float) -> FrozenSet[int]:
    """
    B(center, radius) in the graph's length metric.

    Raises:
        ConfigurationError: If the graph has no lengths
        DomainError: If radius is negative
    """
    if radius < 0:
        raise DomainError("ball radius must be nonnegative")
    dist = shortest_path_lengths(g, [center], cutoff=radius)
    members = {int(v) for v in np.flatnonzero(np.isfinite(dist))}
    members.add(int(center))
    return frozenset(members)


def diameter(g: Graph, vertices: Iterable[int]) -> float:
    """Strong diameter max dist(u, v) over the given vertices (0 for fewer than two)."""
    vertices = sorted(set(int(v) for v in vertices))
    if len(vertices) < 2:
        return 0.0
    return float(distance_matrix(g, vertices)[:, vertices].max())


def boundary(g: Graph, side: Iterable[int]) -> List[int]:
    """δ_G(S): ids of edges with exactly one endpoint in ``side``."""
    mask = np.zeros(g.vertex_count, dtype=bool)
    idx = np.fromiter((int(v) for v in side), dtype=np.int64)
    if idx.size:
        mask[idx] = True
    crossing = mask[g.edges[:, 0]] != mask[g.edges[:, 1]]
    return [int(e) for e in np.flatnonzero(crossing)]


def components(g: Graph, removed: Iterable[int] = ()) -> List[FrozenSet[int]]:
    """
    Connected components of G with ``removed`` edges deleted.

    Returns:
        List[FrozenSet[int]]: Components ordered by their smallest vertex id
    """
    keep = np.ones(g.edge_count, dtype=bool)
    removed = np.fromiter((int(e) for e in removed), dtype=np.int64)
    if removed.size:
        keep[removed] = False
    kept = g.edges[keep]
    n = g.vertex_count
    if n == 0:
        return []
    adj = scipy.sparse.coo_matrix(
        (np.ones(kept.shape[0]), (kept[:, 0], kept[:, 1])), shape=(n, n)
    ).tocsr()
    _, labels = scipy.sparse.csgraph.connected_components(adj, directed=False)
    order: Dict[int, List[int]] = {}
    for v, label in enumerate(labels.tolist()):
        order.setdefault(label, []).append(v)
    # dict preserves first-seen order, i.e. by smallest vertex id
    return [frozenset(members) for members in order.values()]


def product_demand(a: NodeWeighting, u: int, v: int) -> float:
    """
    D_A(u, v) = A(u) A(v) / |A| for the unordered pair {u, v}.

    Raises:
        DomainError: If |A| = 0
        ContractError: If u == v
    """
    total = a.total()
    if total <= 0:
        raise DomainError("product demand needs |A| > 0")
    if u == v:
        raise ContractError("product demand is defined on pairs u != v")
    return a[u] * a[v] / total


def demand_matrix(a: NodeWeighting) -> np.ndarray:
    """Symmetric matrix of D_A with a zero diagonal."""
    total = a.total()
    if total <= 0:
        raise DomainError("product demand needs |A| > 0")
    mass = a.mass.astype(np.float64)
    demand = np.outer(mass, mass) / total
    np.fill_diagonal(demand, 0.0)
    return demand


def demand_distance_sum(g: Graph, a: NodeWeighting, metric: Optional[Sequence[float]] = None) -> float:
    """
    Σ_{u<v} D_A(u, v) · dist_ℓ(u, v) with a fresh shortest-path pass per source.

    Returns ``inf`` if positive demand joins disconnected vertices.
    """
    graph = g if metric is None else g.with_lengths(metric)
    total = a.total()
    if total <= 0:
        return 0.0
    support = a.support()
    mass = a.mass.astype(np.float64)
    objective = 0.0
    for u in support:
        dist = shortest_path_lengths(graph, [u])
        later = [v for v in support if v > u]
        if not later:
            continue
        objective += float(mass[u] * np.dot(mass[later], dist[later])) / total
    return objective
