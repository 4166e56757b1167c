"""
Sweep cuts on a dual length function.

Vertices are ordered by their distance π to a core K, farthest first, and the
prefix with the smallest ratio |δ(S_k)| / D_A(S_k, V∖S_k) wins.
"""
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Tuple

import numpy as np

from .errors import ContractError, InvariantViolation
from .graph import (Graph, NodeWeighting, ball, boundary, demand_distance_sum, diameter,
                    shortest_path_lengths)

logger = logging.getLogger(__name__)

SWEEP_CONSTANT = 12.0
RELATIVE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class PrefixScan:
    """Best prefix of a vertex order together with the sums the scan visits."""

    order: Tuple[int, ...]
    prefix_length: int
    ratio: float
    cut_sizes: np.ndarray = field(repr=False)
    cross_demand: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class SweepResult:
    """
    Outcome of :func:`sweep_cut`.

    Attributes:
        side: Returned side S' (the best prefix or its complement)
        sparsity: |δ(S')| / min{A(S'), A(V∖S')}
        pi: Distance of every vertex to the core
        order: Vertices by descending π, ties by id
        boundary: Edge ids of δ(S')
        prefix_length: k of the winning prefix S_k
        numerator: Σ_e |π(u) − π(v)|
        denominator: Σ_{u<v} D_A(u, v) |π(u) − π(v)|
        telescoped: Σ_k |δ(S_k)| (π(v_k) − π(v_{k+1}))
        min_mass: min{A(S'), A(V∖S')}
    """

    side: FrozenSet[int]
    sparsity: float
    pi: np.ndarray = field(repr=False)
    order: Tuple[int, ...] = field(repr=False)
    boundary: Tuple[int, ...]
    prefix_length: int
    numerator: float
    denominator: float
    telescoped: float
    min_mass: int


def heavy_core(g: Graph, a: NodeWeighting, phi: float) -> Optional[int]:
    """
    Smallest x in supp(A) whose ball B(x, Δ₀) holds at least half the mass.

    Δ₀ = 1/(4φ|A|).

    Raises:
        ContractError: If φ ≤ 0 or |A| = 0
    """
    total = a.total()
    if phi <= 0 or total <= 0:
        raise ContractError("heavy_core needs phi > 0 and |A| > 0")
    radius = 1.0 / (4.0 * phi * total)
    for x in a.support():
        if 2 * a.mass_of(ball(g, x, radius)) >= total:
            return x
    return None


def scan_prefixes(g: Graph, a: NodeWeighting, pi: np.ndarray) -> PrefixScan:
    """
    Evaluate every prefix S_k (1 ≤ k < n) of the descending-π order.

    Prefixes with no cross demand are skipped; ties keep the smaller k.

    Raises:
        ContractError: If no prefix carries cross demand
    """
    n = g.vertex_count
    order = sorted(range(n), key=lambda v: (-pi[v], v))
    total = a.total()
    inside = np.zeros(n, dtype=bool)
    adj = g.adjacency
    cut_sizes = np.zeros(max(n - 1, 0), dtype=np.int64)
    cross = np.zeros(max(n - 1, 0))
    cut = 0
    mass = 0
    best_k, best_ratio = 0, np.inf
    for k, v in enumerate(order[:-1], start=1):
        for w, _ in adj[v]:
            cut += -1 if inside[w] else 1
        inside[v] = True
        mass += a[v]
        cut_sizes[k - 1] = cut
        cross[k - 1] = mass * (total - mass) / total if total else 0.0
        if cross[k - 1] > 0 and cut / cross[k - 1] < best_ratio:
            best_k, best_ratio = k, cut / cross[k - 1]
    if best_k == 0:
        raise ContractError("no prefix separates positive mass on both sides")
    return PrefixScan(tuple(order), best_k, float(best_ratio), cut_sizes, cross)


def _pair_distance_sum(a: NodeWeighting, pi: np.ndarray) -> float:
    """Σ_{u<v} D_A(u, v) |π(u) − π(v)| through sorted prefix sums."""
    support = np.array(a.support(), dtype=np.int64)
    if support.size < 2:
        return 0.0
    values = pi[support]
    mass = a.mass[support].astype(np.float64)
    rank = np.argsort(values, kind="stable")
    values, mass = values[rank], mass[rank]
    mass_before = np.concatenate([[0.0], np.cumsum(mass)[:-1]])
    moment_before = np.concatenate([[0.0], np.cumsum(mass * values)[:-1]])
    return float(np.sum(mass * (values * mass_before - moment_before)) / a.total())


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= RELATIVE_TOLERANCE * max(1.0, abs(x), abs(y))


def sweep_cut(g: Graph, a: NodeWeighting, k_core: Iterable[int], phi: float) -> SweepResult:
    """
    Sweep cut from a heavy low-diameter core.

    Requires Σℓ ≤ 1, Σ D_A·dist_ℓ ≥ 1/φ, A(K) ≥ |A|/3 and
    diam_ℓ(K) ≤ 1/(2φ|A|). Under these the returned side has
    sparsity at most 12φ.

    Args:
        g: Connected graph carrying the dual lengths
        a: Node-weighting
        k_core: The core K
        phi: Expansion parameter φ > 0

    Returns:
        SweepResult: The cut plus the sums the guarantee is checked with

    Raises:
        ContractError: Naming the precondition that fails
        InvariantViolation: If a guaranteed inequality fails at runtime
    """
    core = frozenset(int(v) for v in k_core)
    total = a.total()
    if phi <= 0 or total <= 0:
        raise ContractError("sweep_cut needs phi > 0 and |A| > 0")
    if not core:
        raise ContractError("sweep_cut needs a nonempty core")
    if not g.has_lengths:
        raise ContractError("sweep_cut needs the dual edge lengths")
    length_sum = float(g.lengths.sum())
    if length_sum > 1.0 + RELATIVE_TOLERANCE:
        raise ContractError(f"Σℓ = {length_sum:.12g} > 1")
    objective = demand_distance_sum(g, a)
    if objective < (1.0 / phi) * (1.0 - RELATIVE_TOLERANCE):
        raise ContractError(f"Σ D·dist = {objective:.12g} < 1/φ = {1.0 / phi:.12g}")
    if 3 * a.mass_of(core) < total:
        raise ContractError(f"A(K) = {a.mass_of(core)} < |A|/3 = {total / 3:.6g}")
    spread = diameter(g, core)
    limit = 1.0 / (2.0 * phi * total)
    if spread > limit * (1.0 + 10 * RELATIVE_TOLERANCE):
        raise ContractError(f"diam(K) = {spread:.12g} > 1/(2φ|A|) = {limit:.12g}")

    pi = shortest_path_lengths(g, sorted(core))
    if not np.all(np.isfinite(pi)):
        raise ContractError("sweep_cut needs a connected graph")
    scan = scan_prefixes(g, a, pi)
    order = scan.order

    numerator = float(np.abs(pi[g.edges[:, 0]] - pi[g.edges[:, 1]]).sum())
    denominator = _pair_distance_sum(a, pi)
    gaps = np.array([pi[order[k]] - pi[order[k + 1]] for k in range(len(order) - 1)])
    telescoped = float(np.dot(scan.cut_sizes, gaps))
    context = {"phi": phi, "numerator": numerator, "denominator": denominator,
               "telescoped": telescoped, "ratio": scan.ratio}

    if numerator > length_sum * (1.0 + RELATIVE_TOLERANCE) + 1e-12:
        raise InvariantViolation("sweep numerator exceeds Σℓ", context)
    if not _close(telescoped, numerator):
        raise InvariantViolation("sweep telescoping sum does not match the edge sum", context)
    if not _close(float(np.dot(scan.cross_demand, gaps)), denominator):
        raise InvariantViolation("sweep telescoping sum does not match the demand sum", context)
    if denominator < (1.0 / (SWEEP_CONSTANT * phi)) * (1.0 - RELATIVE_TOLERANCE):
        raise InvariantViolation("sweep denominator is below 1/(12φ)", context)
    if scan.ratio > (numerator / denominator) * (1.0 + RELATIVE_TOLERANCE):
        raise InvariantViolation("best prefix is worse than the averaged ratio", context)

    prefix = frozenset(order[:scan.prefix_length])
    side = frozenset(range(g.vertex_count)) - prefix if core.isdisjoint(prefix) else prefix
    cut_edges = tuple(boundary(g, side))
    min_mass = min(a.mass_of(side), total - a.mass_of(side))
    sparsity = len(cut_edges) / min_mass
    if sparsity > SWEEP_CONSTANT * phi * (1.0 + RELATIVE_TOLERANCE):
        raise InvariantViolation(f"sweep sparsity {sparsity:.6g} exceeds 12φ", context)
    logger.debug("sweep: |S'|=%d cut=%d sparsity=%.6g (12φ=%.6g)",
                 len(side), len(cut_edges), sparsity, SWEEP_CONSTANT * phi)
    return SweepResult(side, sparsity, pi, order, cut_edges, scan.prefix_length,
                       numerator, denominator, telescoped, min_mass)

