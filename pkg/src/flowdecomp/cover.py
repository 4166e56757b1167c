"""
Sparse neighborhood covers and maximal ball packings.

``cluster`` grows one region per terminal, in the given order, in the
original metric: S_i = B(v_i, r_i) minus everything earlier clusters took,
with r_i the smallest radius in [R, 2R) at which the new boundary is small
against the residual volume around v_i.
"""
import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, ContractError, DomainError, InvariantViolation
from .graph import (DISTANCE_TOLERANCE, Graph, ball, boundary, shortest_path_lengths,
                    within)

logger = logging.getLogger(__name__)

DEFAULT_C_COVER = 4.0


@dataclass(frozen=True)
class ClusterCover:
    """
    Disjoint clusters aligned with their terminals.

    Attributes:
        clusters: S_1..S_k, possibly empty, one per terminal
        terminals: Terminal of each cluster, in processing order
        radius: R
        radii: Radius r_i in [R, 2R) each cluster was cut at
        boundary_edges: Union of δ(S) over all clusters (edge ids)
        boundary_count: Σ_S |δ(S)|, counting edges between two clusters twice
        boundary_weight: Σ_S ℓ(δ(S))
        total_length: Σ_e ℓ_e of the metric used
    """

    clusters: Tuple[FrozenSet[int], ...]
    terminals: Tuple[int, ...]
    radius: float
    radii: Tuple[float, ...]
    boundary_edges: Tuple[int, ...]
    boundary_count: int
    boundary_weight: float
    total_length: float

    def vertices(self) -> FrozenSet[int]:
        """V(𝒮)."""
        return frozenset().union(*self.clusters) if self.clusters else frozenset()

    def cut_bound(self, c_cover: float = DEFAULT_C_COVER) -> float:
        """c_cover · log₂(|T|+1) · Σℓ / R."""
        return c_cover * math.log2(len(self.terminals) + 1) * self.total_length / self.radius

    def cut_ratio(self) -> float:
        """Σ|δ(S)| · R / (log₂(|T|+1) · Σℓ), the empirical cover constant."""
        scale = math.log2(len(self.terminals) + 1) * self.total_length
        if scale == 0:
            return 0.0 if self.boundary_count == 0 else math.inf
        return self.boundary_count * self.radius / scale

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)


@dataclass(frozen=True)
class Net:
    """Centers whose Δ-balls are disjoint and whose 2Δ-balls cover the candidates."""

    centers: Tuple[int, ...]
    packing_radius: float

    def __len__(self) -> int:
        return len(self.centers)


def _grow_region(dist: np.ndarray, residual: np.ndarray, edges: np.ndarray,
                 lengths: np.ndarray, radius: float, base_volume: float,
                 rate: float) -> Tuple[float, np.ndarray]:
    """
    Pick the smallest r in [R, 2R) with cut(r) <= rate · vol(r).

    Returns the chosen radius and the member mask B(v, r) ∩ residual.
    """
    lo_end = 2.0 * radius
    live = residual[edges[:, 0]] & residual[edges[:, 1]]
    e_live = edges[live]
    l_live = lengths[live]
    d0, d1 = dist[e_live[:, 0]], dist[e_live[:, 1]]
    d_lo, d_hi = np.minimum(d0, d1), np.maximum(d0, d1)

    window = dist[residual]
    window = window[(window > radius) & (window < lo_end)]
    starts = [radius] + sorted(set(float(x) for x in window))
    ends = starts[1:] + [lo_end]

    fallback: Optional[Tuple[float, float]] = None
    for s, t in zip(starts, ends):
        member_lo = np.array([within(x, s) for x in d_lo], dtype=bool)
        member_hi = np.array([within(x, s) for x in d_hi], dtype=bool)
        crossing = member_lo & ~member_hi
        cut = int(crossing.sum())
        volume = base_volume + float(l_live[member_hi].sum())
        volume += float(np.minimum(l_live[crossing], np.maximum(s - d_lo[crossing], 0.0)).sum())
        if cut == 0:
            chosen = s
        else:
            chosen = max(s, s + (cut / rate - volume) / cut)
        if chosen < t or cut <= rate * volume:
            members = residual & np.array([within(x, s) for x in dist], dtype=bool)
            return chosen if chosen < t else s, members
        ratio = cut / max(volume + cut * (t - s), 1e-300)
        if fallback is None or ratio < fallback[0]:
            fallback = (ratio, s)

    # Only reachable through rounding: the volume argument guarantees a radius.
    s = fallback[1] if fallback else radius
    logger.warning("region growing found no radius meeting its threshold; using r=%.6g", s)
    return s, residual & np.array([within(x, s) for x in dist], dtype=bool)


def cluster(g: Graph, terminals: Sequence[int], radius: float,
            c_cover: float = DEFAULT_C_COVER, check: bool = True) -> ClusterCover:
    """
    Sparse neighborhood cover cluster(G, T, R).

    Args:
        g: Graph with lengths
        terminals: Distinct terminals, processed in the given order
        radius: R > 0
        c_cover: Constant the cut-size guarantees are asserted with
        check: Assert disjointness, covering, diameter and cut size on the output

    Returns:
        ClusterCover: One (possibly empty) cluster per terminal

    Raises:
        DomainError: If radius <= 0
        ContractError: If terminals are empty or repeated
        InvariantViolation: If a checked guarantee fails
    """
    if radius <= 0:
        raise DomainError("cluster radius must be positive")
    terminals = [int(t) for t in terminals]
    if not terminals:
        raise ContractError("cluster needs at least one terminal")
    if len(set(terminals)) != len(terminals):
        raise ContractError("terminals must be distinct")
    if not g.has_lengths:
        raise ConfigurationError("cluster needs edge lengths")
    lengths = g.lengths

    total_length = float(lengths.sum())
    rate = math.log(len(terminals) + 1) / radius
    base_volume = total_length / len(terminals)
    absorbed = np.zeros(g.vertex_count, dtype=bool)
    clusters: List[FrozenSet[int]] = []
    radii: List[float] = []
    for t in terminals:
        dist = shortest_path_lengths(g, [t], cutoff=2.0 * radius)
        chosen, members = _grow_region(dist, ~absorbed, g.edges, lengths, radius,
                                       base_volume, rate)
        members &= dist < 2.0 * radius
        clusters.append(frozenset(int(v) for v in np.flatnonzero(members)))
        radii.append(chosen)
        absorbed |= members

    count = 0
    weight = 0.0
    union = set()
    for s in clusters:
        delta = boundary(g, s)
        count += len(delta)
        weight += float(lengths[delta].sum()) if delta else 0.0
        union.update(delta)
    cover = ClusterCover(tuple(clusters), tuple(terminals), float(radius), tuple(radii),
                         tuple(sorted(union)), count, weight, total_length)
    logger.debug("cluster: |T|=%d R=%.6g clusters=%d boundary=%d ratio=%.4g",
                 len(terminals), radius, sum(1 for s in clusters if s), count, cover.cut_ratio())
    if check:
        check_cover(g, cover, c_cover)
    return cover


def check_cover(g: Graph, cover: ClusterCover, c_cover: float = DEFAULT_C_COVER) -> None:
    """
    Assert disjointness, covering, diameter and both cut-size bounds.

    Raises:
        InvariantViolation: Naming the first property that fails
    """
    seen = set()
    for s in cover.clusters:
        if seen & s:
            raise InvariantViolation("clusters are not disjoint")
        seen |= s
    for t, s in zip(cover.terminals, cover.clusters):
        if not ball(g, t, cover.radius) <= seen:
            raise InvariantViolation(f"covering fails: B({t}, R) is not inside the clusters")
        if not s <= ball(g, t, 2.0 * cover.radius):
            raise InvariantViolation(f"diameter fails: cluster of {t} leaves B({t}, 2R)")
    bound = cover.cut_bound(c_cover) * (1.0 + DISTANCE_TOLERANCE)
    if cover.boundary_weight > bound + 1e-12:
        raise InvariantViolation(
            f"cut weight {cover.boundary_weight:.6g} exceeds c_cover·log(|T|+1)·Σℓ/R = {bound:.6g}"
        )
    if cover.boundary_count > bound + 1e-9:
        raise InvariantViolation(
            f"cut size {cover.boundary_count} exceeds c_cover·log(|T|+1)·Σℓ/R = {bound:.6g}"
        )


def build_net(g: Graph, candidates: Iterable[int], delta: float) -> Net:
    """
    Greedy maximal packing of δ-balls around candidates in ascending id order.

    Raises:
        ContractError: If there are no candidates
        InvariantViolation: If some candidate is farther than 2δ from every center
    """
    ordered = sorted(set(int(v) for v in candidates))
    if not ordered:
        raise ContractError("build_net needs at least one candidate")
    taken = np.zeros(g.vertex_count, dtype=bool)
    centers: List[int] = []
    for x in ordered:
        region = np.fromiter(ball(g, x, delta), dtype=np.int64)
        if taken[region].any():
            continue
        centers.append(x)
        taken[region] = True

    reach = shortest_path_lengths(g, centers, cutoff=2.0 * delta)
    for y in ordered:
        if not within(reach[y], 2.0 * delta, 2 * DISTANCE_TOLERANCE):
            raise InvariantViolation(f"net is not maximal: candidate {y} is uncovered")
    return Net(tuple(centers), float(delta))
