"""
Independent checks of decomposition outputs.

Every component of G − C is re-solved with the exact concurrent-flow LP;
small ones are also checked by enumerating all cuts. The audit tree is
replayed against the per-level and overall edge budgets.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Optional

import numpy as np

from .config import VerifyConfig
from .decomp import (CASE_BALANCED, CASE_HEAVY, CASE_SPLIT, AuditNode, Decomposition,
                     compute_scales)
from .errors import ContractError, InstanceSizeError, IntegrityError, InvariantViolation
from .flow_lp import solve_exact
from .graph import Graph, NodeWeighting, components, demand_matrix
from .sweep import SWEEP_CONSTANT

logger = logging.getLogger(__name__)

CERTIFIED = "certified"
FAILED = "failed"
UNVERIFIED = "unverified"

BRUTE_FORCE_LIMIT = 20
TWO_HOP_SLACK = 1e-9


@dataclass(frozen=True)
class ExpansionReport:
    """
    Verdict on one component.

    Attributes:
        component: Root vertex ids of the component
        kappa_product: Exact congestion of the A-product demand, if solved
        flow_expanding_at: 1/(2κ), the flow expansion certified by routing D_A
        cut_expanding_at: Exact cut expansion, for small components
        status: "certified", "failed" or "unverified"
        note: Why the status is not "certified"
    """

    component: FrozenSet[int]
    total_mass: int
    kappa_product: Optional[float]
    flow_expanding_at: Optional[float]
    cut_expanding_at: Optional[float]
    status: str
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "component": sorted(self.component),
            "total_mass": self.total_mass,
            "kappa_product": self.kappa_product,
            "flow_expanding_at": self.flow_expanding_at,
            "cut_expanding_at": self.cut_expanding_at,
            "status": self.status,
            "note": self.note,
        }


@dataclass
class VerificationReport:
    """Per-component verdicts for a removed edge set."""

    phi: float
    removed_count: int
    reports: List[ExpansionReport] = field(default_factory=list)
    strict: bool = False

    @property
    def failed(self) -> List[ExpansionReport]:
        return [r for r in self.reports if r.status == FAILED]

    @property
    def unverified(self) -> List[ExpansionReport]:
        return [r for r in self.reports if r.status == UNVERIFIED]

    @property
    def passed(self) -> bool:
        return not self.failed and not (self.strict and self.unverified)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "phi": self.phi,
            "removed_count": self.removed_count,
            "passed": self.passed,
            "failed": len(self.failed),
            "unverified": len(self.unverified),
            "components": [r.to_dict() for r in self.reports],
        }


@dataclass(frozen=True, eq=False)
class TwoHopRouting:
    """
    Two-hop routing of a demand D' through every intermediate z.

    Attributes:
        demand: D' as a symmetric matrix
        capacity: D_A, the capacity of every pair
        load: Total flow on every pair
        max_ratio: max load/capacity over pairs with positive capacity
    """

    demand: np.ndarray = field(repr=False)
    capacity: np.ndarray = field(repr=False)
    load: np.ndarray = field(repr=False)
    max_ratio: float
    mass: np.ndarray = field(repr=False)

    def assignment(self, x: int, y: int) -> Dict[int, float]:
        """Amount D'(x, y)·A(z)/|A| sent through each z (z = x or y is the direct hop)."""
        total = self.mass.sum()
        amount = self.demand[x, y]
        return {int(z): float(amount * self.mass[z] / total)
                for z in np.flatnonzero(self.mass) if amount > 0}


@dataclass
class OverheadReport:
    """
    Replay of a decomposition audit.

    Attributes:
        removed_count: |C|
        bound: φ·β·|A|·log₂|A| with the configured c₁
        beta: β = c₁·8^L·L²·γ²
        ratio: |C| / (φ|A|log₂|A|), the realized β
        realized_c1: ratio / (8^L·L²·γ²)
        heavy_cut, heavy_budget: Σ heavy contributions and Σ 12φ·min mass
        balanced_cut, balanced_budget: Σ balanced contributions and their bounds
        levels: Number of nodes that removed edges
        violations: Inequalities that failed
    """

    removed_count: int
    bound: float
    beta: float
    ratio: float
    realized_c1: float
    heavy_cut: int = 0
    heavy_budget: float = 0.0
    balanced_cut: int = 0
    balanced_budget: float = 0.0
    levels: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "removed_count": self.removed_count,
            "bound": self.bound,
            "beta": self.beta,
            "ratio": self.ratio,
            "realized_c1": self.realized_c1,
            "heavy_cut": self.heavy_cut,
            "heavy_budget": self.heavy_budget,
            "balanced_cut": self.balanced_cut,
            "balanced_budget": self.balanced_budget,
            "levels": self.levels,
            "within_bound": self.within_bound,
            "violations": list(self.violations),
        }


def brute_force_cut_expansion(g: Graph, a: NodeWeighting) -> float:
    """
    min |δ(S)| / min{A(S), A(V∖S)} over all cuts with mass on both sides.

    Returns ``inf`` when no such cut exists.

    Raises:
        InstanceSizeError: If the graph has more than 20 vertices
    """
    n = g.vertex_count
    if n > BRUTE_FORCE_LIMIT:
        raise InstanceSizeError(f"cut enumeration needs n <= {BRUTE_FORCE_LIMIT}, got {n}")
    if n < 2:
        return math.inf
    # Subsets avoiding the last vertex enumerate every cut once.
    masks = np.arange(1, 2 ** (n - 1), dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    cut = np.zeros(masks.shape[0], dtype=np.int64)
    for u, v in g.edges.tolist():
        cut += bits[:, u] != bits[:, v]
    inside = bits @ a.mass
    light = np.minimum(inside, a.total() - inside)
    usable = light > 0
    if not usable.any():
        return math.inf
    return float((cut[usable] / light[usable]).min())


def check_flow_expansion(g: Graph, a: NodeWeighting, phi: float,
                         config: Optional[VerifyConfig] = None) -> ExpansionReport:
    """
    Certify that A is (φ/2)-flow-expanding in ``g`` by routing D_A with congestion ≤ 1/φ.

    Args:
        g: Connected component
        a: Node-weighting on ``g``
        phi: Routing threshold φ
        config: Size limits and tolerance

    Returns:
        ExpansionReport: "unverified" when ``g`` is too large for the exact LP

    Raises:
        ContractError: If φ ≤ 0 or ``g`` is disconnected
    """
    config = config or VerifyConfig()
    if phi <= 0:
        raise ContractError("phi must be positive")
    vertices = frozenset(g.root_vertices(range(g.vertex_count)))
    total = a.total()
    if len(components(g)) > 1:
        raise ContractError("check_flow_expansion expects a connected component")
    if len(a.support()) <= 1:
        return ExpansionReport(vertices, total, 0.0, math.inf, math.inf, CERTIFIED,
                               "at most one vertex carries mass")
    if g.vertex_count > config.exact_vertex_limit:
        logger.warning("component with %d vertices is too large to verify", g.vertex_count)
        return ExpansionReport(vertices, total, None, None, None, UNVERIFIED,
                               f"more than {config.exact_vertex_limit} vertices")

    cert, _ = solve_exact(g, a)
    kappa = cert.kappa
    flow_at = 1.0 / (2.0 * kappa)
    cut_at = None
    if g.vertex_count <= config.brute_force_limit:
        cut_at = brute_force_cut_expansion(g, a)

    status, note = CERTIFIED, ""
    if kappa > 1.0 / phi + config.tolerance:
        status, note = FAILED, f"kappa {kappa:.9g} exceeds 1/phi = {1.0 / phi:.9g}"
    elif cut_at is not None and flow_at > cut_at * (1.0 + config.tolerance):
        status, note = FAILED, "flow expansion exceeds cut expansion"
    return ExpansionReport(vertices, total, kappa, flow_at, cut_at, status, note)


def verify_decomposition(g: Graph, a: NodeWeighting, removed: Iterable[int], phi: float,
                         config: Optional[VerifyConfig] = None) -> VerificationReport:
    """
    Check every component of G − C.

    Args:
        g: Input graph
        a: Node-weighting on ``g``
        removed: Edge ids of C
        phi: Routing threshold handed to :func:`check_flow_expansion`
        config: Size limits, strictness and worker count

    Raises:
        ContractError: If an edge id is out of range
    """
    config = config or VerifyConfig()
    removed = sorted(set(int(e) for e in removed))
    if removed and (removed[0] < 0 or removed[-1] >= g.edge_count):
        raise ContractError("removed edge id out of range")
    parts = components(g, removed)
    kept = np.ones(g.edge_count, dtype=bool)
    kept[removed] = False
    residual = Graph(g.vertex_count, g.edges[kept], None, g.vertex_labels,
                     g.edge_labels[kept])

    def check(part: FrozenSet[int]) -> ExpansionReport:
        return check_flow_expansion(residual.subgraph(part), a.select(part), phi, config)

    if config.max_workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            reports = list(pool.map(check, parts))
    else:
        reports = [check(part) for part in parts]
    report = VerificationReport(phi, len(removed), reports, config.strict)
    logger.info("verified %d components: %d failed, %d unverified",
                len(reports), len(report.failed), len(report.unverified))
    return report


def two_hop_route(a: NodeWeighting, d_prime: np.ndarray) -> TwoHopRouting:
    """
    Route an A-respecting demand D' through the complete graph with capacities D_A.

    Each pair (x, y) sends D'(x, y)·A(z)/|A| from x to z and on to y for every z.

    Raises:
        ContractError: If D' is not a symmetric nonnegative A-respecting demand
        InvariantViolation: If some pair carries more than twice its capacity
    """
    n = len(a)
    total = a.total()
    demand = np.asarray(d_prime, dtype=np.float64)
    if demand.shape != (n, n):
        raise ContractError(f"demand must be a {n}x{n} matrix")
    if np.any(demand < 0) or not np.allclose(demand, demand.T):
        raise ContractError("demand must be symmetric and nonnegative")
    demand = demand.copy()
    np.fill_diagonal(demand, 0.0)
    mass = a.mass.astype(np.float64)
    if np.any(demand.sum(axis=1) > mass * (1.0 + TWO_HOP_SLACK) + 1e-12):
        raise ContractError("demand does not respect A")
    if total == 0:
        zero = np.zeros((n, n))
        return TwoHopRouting(demand, zero, zero, 0.0, mass)

    pairs = np.triu(demand, 1)
    first = np.outer(pairs.sum(axis=1), mass) / total
    second = np.outer(mass, pairs.sum(axis=0)) / total
    np.fill_diagonal(first, 0.0)
    np.fill_diagonal(second, 0.0)
    load = first + first.T + second + second.T
    capacity = demand_matrix(a)

    positive = capacity > 0
    if np.any(load[~positive] > 1e-12):
        raise InvariantViolation("two-hop routing uses a pair without capacity")
    max_ratio = float((load[positive] / capacity[positive]).max()) if positive.any() else 0.0
    if max_ratio > 2.0 + TWO_HOP_SLACK:
        raise InvariantViolation(f"two-hop load ratio {max_ratio:.12g} exceeds 2")
    return TwoHopRouting(demand, capacity, load, max_ratio, mass)


def _close(x: Optional[float], y: float) -> bool:
    return x is not None and abs(x - y) <= 1e-9 * max(1.0, abs(y))


def _replay_cut(g: Graph, node: AuditNode) -> None:
    """Edges of G[node] joining two different children must be exactly the node's cut."""
    if not node.children:
        return
    owner = np.full(g.vertex_count, -1, dtype=np.int64)
    for index, child in enumerate(node.children):
        members = np.fromiter(child.vertices, dtype=np.int64)
        if members.size and np.any(owner[members] >= 0):
            raise IntegrityError("recursion children overlap")
        owner[members] = index
    inside = np.zeros(g.vertex_count, dtype=bool)
    inside[np.fromiter(node.vertices, dtype=np.int64)] = True
    if not np.array_equal(inside, owner >= 0):
        raise IntegrityError("recursion children do not cover the parent's vertices")
    ends = owner[g.edges]
    crossing = inside[g.edges[:, 0]] & inside[g.edges[:, 1]] & (ends[:, 0] != ends[:, 1])
    if set(np.flatnonzero(crossing).tolist()) != set(node.cut):
        raise IntegrityError(f"recorded cut of a {node.case} node differs from its recomputation")


def _subtree_removed(node: AuditNode, c1: float, violations: List[str]) -> int:
    """Edges removed below ``node``; records every subtree over φβ|A'|log|A'| at its own mass."""
    removed = node.contribution + sum(_subtree_removed(child, c1, violations)
                                      for child in node.children)
    bound = (compute_scales(node.total_mass, node.phi).overhead_bound(c1)
             if node.total_mass >= 2 else 0.0)
    if removed > bound * (1.0 + 1e-9):
        violations.append(f"subtree of a {node.case} node removes {removed} > {bound:.6g}")
    return removed


def audit_overhead(d: Decomposition, phi: Optional[float] = None,
                   g: Optional[Graph] = None) -> OverheadReport:
    """
    Replay the audit tree and the edge budgets of a decomposition.

    Args:
        d: Decomposition with a complete audit tree
        phi: φ the budgets are evaluated at (the run's φ by default)
        g: Input graph; when given, every node's cut is recomputed from its children

    Returns:
        OverheadReport: Realized β and any budget that failed

    Raises:
        IntegrityError: If a recorded value does not match its recomputation
    """
    phi = d.run_phi if phi is None else phi
    c0 = float(d.config.get("c0", 64.0))
    c1 = float(d.config.get("c1", 64.0))
    removed = len(d.removed)
    if d.total_mass >= 2:
        top = compute_scales(d.total_mass, phi)
        bound = top.overhead_bound(c1)
        beta = top.beta(c1)
        ratio = removed / (phi * d.total_mass * math.log2(d.total_mass))
        realized_c1 = ratio / (8.0 ** top.L * top.L ** 2 * top.gamma ** 2)
    else:
        bound = beta = ratio = realized_c1 = 0.0
    report = OverheadReport(removed, bound, beta, ratio, realized_c1)

    seen = set()
    for node in d.audit.walk():
        if len(node.cut) != node.contribution:
            raise IntegrityError(f"recorded contribution {node.contribution} differs from "
                                 f"the {len(node.cut)} recorded edges")
        if seen & set(node.cut):
            raise IntegrityError("an edge is removed by two recursion nodes")
        seen.update(node.cut)
        below = sum(child.total_mass for child in node.children)
        if node.children and below != node.total_mass:
            raise IntegrityError("recursion children do not partition the parent mass")
        if g is not None:
            _replay_cut(g, node)
        if node.cut:
            report.levels += 1

        if node.case == CASE_HEAVY:
            budget = SWEEP_CONSTANT * node.phi * node.sweep["min_mass"]
            if not _close(node.level_bound, budget):
                raise IntegrityError("recorded heavy-case bound does not match 12φ·min mass")
            report.heavy_cut += node.contribution
            report.heavy_budget += budget
            if node.contribution > budget * (1.0 + 1e-9):
                report.violations.append(f"heavy level cut {node.contribution} > {budget:.6g}")
        elif node.case == CASE_BALANCED:
            sp = compute_scales(node.total_mass, node.phi)
            budget = sp.balanced_bound(c0, int(node.scales["winner"][1]))
            if not _close(node.level_bound, budget):
                raise IntegrityError("recorded balanced-case bound does not match its replay")
            report.balanced_cut += node.contribution
            report.balanced_budget += budget
            if node.contribution > budget * (1.0 + 1e-9):
                report.violations.append(f"balanced level cut {node.contribution} > {budget:.6g}")
        elif node.case == CASE_SPLIT and node.cut:
            raise IntegrityError("a component split removed edges")

    if seen != set(d.removed):
        raise IntegrityError("audit cuts do not add up to the removed edge set")
    if d.algorithm == "ed":
        if removed > bound * (1.0 + 1e-9):
            report.violations.append(f"|C| = {removed} exceeds φβ|A|log|A| = {bound:.6g}")
        _subtree_removed(d.audit, c1, report.violations)
    return report
