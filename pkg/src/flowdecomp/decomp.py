"""
Recursive expander decomposition ED(G, A, φ).

Each call solves the concurrent-flow LP of the A-product demand. If it
routes, the graph is kept whole. Otherwise the dual lengths either expose a
heavy core, which is separated by a sweep cut, or the mass is spread out, in
which case a net of the dominant (radius scale, mass scale) class is
clustered and every cluster plus the remainder is decomposed again.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from .config import DecompositionConfig
from .cover import ClusterCover, build_net, cluster
from .errors import ContractError, InvariantViolation
from .flow_lp import NotExpanding, routability_gate
from .graph import DISTANCE_TOLERANCE, Graph, NodeWeighting, ball, components, shortest_path_lengths
from .sweep import SWEEP_CONSTANT, heavy_core, sweep_cut

logger = logging.getLogger(__name__)

CASE_BASE = "base"
CASE_SPLIT = "split"
CASE_EXPANDING = "expanding"
CASE_HEAVY = "heavy"
CASE_BALANCED = "balanced"


@dataclass(frozen=True)
class ScaleParams:
    """
    Distance and mass scales of one recursion level.

    Attributes:
        total_mass: |A|
        phi: φ
        gamma: exp(√(log₂log₂|A|)), with the double log floored at 1
        L: ⌈log_γ log₂|A|⌉ + 1
        delta: Δ_i = 1/(4φ|A|8^i) for 0 ≤ i ≤ L
        mass_thresholds: a_j = |A|/2^(γ^j) for -1 ≤ j ≤ L, stored from j = -1
    """

    total_mass: int
    phi: float
    gamma: float
    L: int
    delta: Tuple[float, ...]
    mass_thresholds: Tuple[float, ...]

    def threshold(self, j: int) -> float:
        """a_j."""
        if not -1 <= j <= self.L:
            raise ContractError(f"mass scale {j} outside [-1, {self.L}]")
        return self.mass_thresholds[j + 1]

    def beta(self, c1: float) -> float:
        """β = c₁·8^L·L²·γ²."""
        return c1 * 8.0 ** self.L * self.L ** 2 * self.gamma ** 2

    def overhead_bound(self, c1: float) -> float:
        """φ·β·|A|·log₂|A|, the budget for all removed edges."""
        return self.phi * self.beta(c1) * self.total_mass * math.log2(self.total_mass)

    def balanced_bound(self, c0: float, j_star: int) -> float:
        """c₀·φ·8^L·γ²·|A|·log₂(|A|/a_{j*−2}) with log₂(|A|/a_j) = γ^j."""
        return (c0 * self.phi * 8.0 ** self.L * self.gamma ** 2 * self.total_mass
                * self.gamma ** (j_star - 2))


@dataclass(frozen=True)
class VertexScales:
    """
    Radius and mass scale of every support vertex.

    Attributes:
        radius_scale: x -> i_x
        mass_scale: x -> j_x
        classes: (i, j) -> V_{i,j}
        winner: (i*, j*), the heaviest class
        ball_masses: x -> (A(B(x, Δ_0)), ..., A(B(x, Δ_L)))
    """

    radius_scale: Dict[int, int]
    mass_scale: Dict[int, int]
    classes: Dict[Tuple[int, int], FrozenSet[int]]
    winner: Tuple[int, int]
    ball_masses: Dict[int, Tuple[int, ...]] = field(repr=False)

    def class_mass(self, a: NodeWeighting, key: Tuple[int, int]) -> int:
        return a.mass_of(self.classes.get(key, ()))


@dataclass
class AuditNode:
    """
    One recursion node of a decomposition run.

    ``cut`` and ``vertices`` hold root-graph ids.
    """

    case: str
    vertices: Tuple[int, ...]
    total_mass: int
    phi: float
    cut: Tuple[int, ...] = ()
    contribution: int = 0
    level_bound: Optional[float] = None
    kappa: Optional[float] = None
    dual_objective: Optional[float] = None
    solver: Optional[str] = None
    certificate: Optional[str] = None
    lengths: Optional[str] = None
    scales: Dict[str, Any] = field(default_factory=dict)
    sweep: Dict[str, Any] = field(default_factory=dict)
    children: List["AuditNode"] = field(default_factory=list)

    def depth(self) -> int:
        return 1 + max((child.depth() for child in self.children), default=0)

    def walk(self) -> Iterable["AuditNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> List["AuditNode"]:
        return [node for node in self.walk() if not node.children]

    def to_dict(self) -> Dict[str, Any]:
        payload = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "children"}
        payload["vertices"] = list(self.vertices)
        payload["cut"] = list(self.cut)
        payload["children"] = [child.to_dict() for child in self.children]
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "AuditNode":
        data = dict(payload)
        children = [cls.from_dict(child) for child in data.pop("children", [])]
        data["vertices"] = tuple(data.get("vertices", ()))
        data["cut"] = tuple(data.get("cut", ()))
        return cls(children=children, **data)


@dataclass
class Decomposition:
    """
    Removed edges C, the components of G − C and the audit tree of the run.

    Attributes:
        removed: Root edge ids of C, ascending
        components: Vertex sets of G − C, by smallest vertex
        audit: Root of the recursion tree
        phi: φ the caller asked for
        run_phi: φ the recursion ran at
        certified_phi: φ every component is flow-expanding at
        total_mass: |A| of the input
        algorithm: "ed" or "baseline"
        config: Settings of the run
    """

    removed: Tuple[int, ...]
    components: List[FrozenSet[int]]
    audit: AuditNode
    phi: float
    run_phi: float
    certified_phi: float
    total_mass: int
    algorithm: str = "ed"
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return self.audit.depth()

    def overhead_ratio(self) -> float:
        """|C| / (φ|A|log₂|A|), 0 when the denominator vanishes."""
        if self.total_mass < 2:
            return 0.0
        return len(self.removed) / (self.run_phi * self.total_mass * math.log2(self.total_mass))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "phi": self.phi,
            "run_phi": self.run_phi,
            "certified_phi": self.certified_phi,
            "total_mass": self.total_mass,
            "removed": list(self.removed),
            "components": [sorted(c) for c in self.components],
            "depth": self.depth,
            "overhead_ratio": self.overhead_ratio(),
            "config": dict(self.config),
            "audit": self.audit.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "Decomposition":
        return cls(
            removed=tuple(payload["removed"]),
            components=[frozenset(c) for c in payload["components"]],
            audit=AuditNode.from_dict(payload["audit"]),
            phi=payload["phi"],
            run_phi=payload["run_phi"],
            certified_phi=payload["certified_phi"],
            total_mass=payload["total_mass"],
            algorithm=payload.get("algorithm", "ed"),
            config=payload.get("config", {}),
        )


def certified_exactly(root: AuditNode) -> bool:
    """True when every component kept under ``root`` was certified by the exact LP."""
    return all(leaf.solver == "exact" for leaf in root.leaves() if leaf.case == CASE_EXPANDING)


def compute_scales(total_mass: int, phi: float) -> ScaleParams:
    """
    Scales γ, L, Δ_i and a_j for mass |A| and expansion φ.

    Raises:
        ContractError: If |A| < 2 or φ ≤ 0
    """
    if total_mass < 2:
        raise ContractError("compute_scales needs |A| >= 2")
    if phi <= 0:
        raise ContractError("phi must be positive")
    log_mass = math.log2(total_mass)
    gamma = math.exp(math.sqrt(max(math.log2(log_mass), 1.0)))
    L = max(1, math.ceil(math.log(log_mass) / math.log(gamma) - 1e-12) + 1)
    delta = tuple(1.0 / (4.0 * phi * total_mass * 8.0 ** i) for i in range(L + 1))
    thresholds = tuple(total_mass * 2.0 ** (-(gamma ** j)) for j in range(-1, L + 1))
    if gamma ** L <= log_mass:
        raise InvariantViolation(f"γ^L = {gamma ** L:.6g} does not exceed log₂|A| = {log_mass:.6g}")
    return ScaleParams(int(total_mass), float(phi), gamma, L, delta, thresholds)


def vertex_scales(g: Graph, a: NodeWeighting, sp: ScaleParams) -> VertexScales:
    """
    Radius scale, mass scale and the heaviest class of every support vertex.

    Assumes no vertex has half the mass inside its Δ₀-ball.

    Raises:
        InvariantViolation: If a scale falls outside [1, L] or the winning class is too light
    """
    total = sp.total_mass
    radii = np.array(sp.delta) * (1.0 + DISTANCE_TOLERANCE)
    radius_scale: Dict[int, int] = {}
    mass_scale: Dict[int, int] = {}
    ball_masses: Dict[int, Tuple[int, ...]] = {}
    for x in a.support():
        dist = shortest_path_lengths(g, [x], cutoff=sp.delta[0])
        masses = tuple(int(a.mass[dist <= r].sum()) for r in radii)
        ball_masses[x] = masses
        heights = [math.log2(total / m) for m in masses]
        i_x = next((i for i in range(1, sp.L + 1)
                    if heights[i] <= sp.gamma * heights[i - 1] * (1.0 + 1e-12)), None)
        if i_x is None:
            raise InvariantViolation(f"radius scale of vertex {x} exceeds L = {sp.L}",
                                     {"vertex": x, "ball_masses": list(masses)})
        m = masses[i_x]
        j_x = next((j for j in range(1, sp.L + 1)
                    if sp.threshold(j) < m <= sp.threshold(j - 1)), None)
        if j_x is None:
            raise InvariantViolation(f"mass scale of vertex {x} outside [1, {sp.L}]",
                                     {"vertex": x, "ball_mass": m})
        radius_scale[x] = i_x
        mass_scale[x] = j_x

    grouped: Dict[Tuple[int, int], set] = {}
    for x in radius_scale:
        grouped.setdefault((radius_scale[x], mass_scale[x]), set()).add(x)
    classes = {key: frozenset(members) for key, members in sorted(grouped.items())}
    winner = min(classes, key=lambda key: (-a.mass_of(classes[key]), key))
    if a.mass_of(classes[winner]) * sp.L ** 2 < total:
        raise InvariantViolation("heaviest scale class holds less than |A|/L²",
                                 {"winner": list(winner)})
    return VertexScales(radius_scale, mass_scale, classes, winner, ball_masses)


def balanced_step(g: Graph, a: NodeWeighting, sp: ScaleParams, vs: VertexScales,
                  c_cover: float = 4.0) -> Tuple[ClusterCover, List[int]]:
    """
    Cluster a net of the winning class and return the cover with its boundary.

    Args:
        g: Graph with the dual lengths
        a: Node-weighting
        sp: Scales of this level
        vs: Vertex scales with the winning class (i*, j*)
        c_cover: Constant the cover guarantees are checked with

    Returns:
        Tuple[ClusterCover, List[int]]: The cover and the local ids of ∪δ(S)

    Raises:
        InvariantViolation: If the net size, progress or cluster mass bound fails
    """
    i_star, j_star = vs.winner
    total = sp.total_mass
    packing = sp.delta[i_star]
    net = build_net(g, vs.classes[vs.winner], packing)
    context = {"winner": [i_star, j_star], "net_size": len(net)}
    if len(net) * sp.threshold(j_star) > total * (1.0 + 1e-9):
        raise InvariantViolation("net has more than |A|/a_{j*} centers", context)

    cover = cluster(g, net.centers, 2.0 * packing, c_cover)
    covered = a.mass_of(cover.vertices())
    if covered * sp.L ** 2 < total:
        raise InvariantViolation("clusters hold less than |A|/L² mass", context)
    ceiling = sp.threshold(j_star - 2)
    for s in cover.clusters:
        if a.mass_of(s) > ceiling * (1.0 + 1e-9):
            raise InvariantViolation(
                f"cluster mass {a.mass_of(s)} exceeds a_(j*-2) = {ceiling:.6g}", context)
    return cover, list(cover.boundary_edges)


class ExpanderDecomposer:
    """
    Runs ED(G, A, φ) under a :class:`DecompositionConfig`.

    Args:
        config: Solver choice, audited constants and concurrency
    """

    def __init__(self, config: Optional[DecompositionConfig] = None):
        self.config = (config or DecompositionConfig()).validate()

    def decompose(self, g: Graph, a: NodeWeighting, phi: float) -> Decomposition:
        """
        Decompose ``g`` so every component of G − C is flow-expanding.

        Raises:
            ContractError: If φ ≤ 0 or the weighting does not match the graph
            InvariantViolation: If any runtime guarantee fails
        """
        if phi <= 0:
            raise ContractError("phi must be positive")
        if len(a) != g.vertex_count:
            raise ContractError("node-weighting and graph have different vertex counts")
        run_phi = self.config.effective_phi(phi)
        logger.info("decomposing n=%d m=%d |A|=%d at phi=%.6g (solver=%s)",
                    g.vertex_count, g.edge_count, a.total(), run_phi, self.config.solver)
        root = self._multi(g, a, run_phi, depth=0)
        removed = tuple(sorted(set(e for node in root.walk() for e in node.cut)))
        parts = components(g, removed)
        total = a.total()
        if total >= 2:
            bound = compute_scales(total, run_phi).overhead_bound(self.config.c1)
            if len(removed) > bound * (1.0 + 1e-9):
                raise InvariantViolation(
                    f"|C| = {len(removed)} exceeds φβ|A|log|A| = {bound:.6g}", root.to_dict())
        leaf_sets = sorted((frozenset(leaf.vertices) for leaf in root.leaves() if leaf.vertices),
                           key=min)
        if leaf_sets != parts:
            raise InvariantViolation("recursion leaves do not match the components of G − C")
        logger.info("removed %d edges, %d components, depth %d",
                    len(removed), len(parts), root.depth())
        certified = self.config.certified_phi(phi, exact=certified_exactly(root))
        return Decomposition(removed, parts, root, phi, run_phi, certified, total, "ed",
                             asdict(self.config))

    def _map(self, tasks: List[Callable[[], AuditNode]], depth: int) -> List[AuditNode]:
        # Only the top level fans out so workers never wait on their own pool.
        if self.config.max_workers > 1 and depth == 0 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=self.config.max_workers) as pool:
                futures = [pool.submit(task) for task in tasks]
                return [f.result() for f in futures]
        return [task() for task in tasks]

    def _multi(self, g: Graph, a: NodeWeighting, phi: float, depth: int) -> AuditNode:
        parts = components(g)
        if len(parts) <= 1:
            return self._single(g, a, phi, depth)
        node = AuditNode(CASE_SPLIT, tuple(g.root_vertices(range(g.vertex_count))),
                         a.total(), phi)
        node.children = self._map(
            [lambda part=part: self._single(g.subgraph(part), a.select(part), phi, depth + 1)
             for part in parts],
            depth,
        )
        return node

    def _single(self, g: Graph, a: NodeWeighting, phi: float, depth: int) -> AuditNode:
        vertices = tuple(g.root_vertices(range(g.vertex_count)))
        total = a.total()
        if total <= 1 or len(a.support()) <= 1 or g.edge_count == 0:
            return AuditNode(CASE_BASE, vertices, total, phi)

        solver = self.config.solver_for(g.vertex_count)
        verdict = routability_gate(g, a, phi, solver, self.config.epsilon)
        node = AuditNode(CASE_EXPANDING, vertices, total, phi, kappa=verdict.kappa,
                         dual_objective=verdict.lengths.objective, solver=solver,
                         certificate=verdict.certificate.digest(),
                         lengths=verdict.lengths.digest())
        if not isinstance(verdict, NotExpanding):
            logger.debug("depth %d: n=%d |A|=%d expanding (kappa=%.6g)",
                         depth, g.vertex_count, total, verdict.kappa)
            return node

        metric = g.with_lengths(verdict.lengths.lengths)
        x = heavy_core(metric, a, phi)
        if x is not None:
            return self._heavy(metric, a, phi, depth, node, x)
        return self._balanced(metric, a, phi, depth, node)

    def _heavy(self, g: Graph, a: NodeWeighting, phi: float, depth: int,
               node: AuditNode, x: int) -> AuditNode:
        sp = compute_scales(a.total(), phi)
        core = ball(g, x, sp.delta[0])
        result = sweep_cut(g, a, core, phi)
        node.case = CASE_HEAVY
        node.cut = tuple(g.root_edges(result.boundary))
        node.contribution = len(node.cut)
        node.level_bound = SWEEP_CONSTANT * phi * result.min_mass
        node.sweep = {"core": int(g.vertex_labels[x]), "core_size": len(core),
                      "sparsity": result.sparsity, "min_mass": result.min_mass,
                      "numerator": result.numerator, "denominator": result.denominator}
        if node.contribution > node.level_bound * (1.0 + 1e-9):
            raise InvariantViolation("heavy cut exceeds 12φ·min{A(S'), A(V−S')}", node.to_dict())
        logger.debug("depth %d: heavy core at %d, cut %d edges (sparsity %.4g)",
                     depth, x, node.contribution, result.sparsity)

        other = frozenset(range(g.vertex_count)) - result.side
        sides = sorted([result.side, other], key=min)
        node.children = self._map(
            [lambda side=side: self._multi(g.subgraph(side).without_lengths(), a.select(side),
                                           phi, depth + 1)
             for side in sides],
            depth,
        )
        self._check_mass(node, equal=True)
        return node

    def _balanced(self, g: Graph, a: NodeWeighting, phi: float, depth: int,
                  node: AuditNode) -> AuditNode:
        sp = compute_scales(a.total(), phi)
        vs = vertex_scales(g, a, sp)
        cover, edges = balanced_step(g, a, sp, vs, self.config.c_cover)
        i_star, j_star = vs.winner
        node.case = CASE_BALANCED
        node.cut = tuple(g.root_edges(edges))
        node.contribution = len(node.cut)
        node.level_bound = sp.balanced_bound(self.config.c0, j_star)
        node.scales = {"gamma": sp.gamma, "L": sp.L, "winner": [i_star, j_star],
                       "net_size": len(cover.terminals),
                       "winner_mass": vs.class_mass(a, vs.winner),
                       "cover_ratio": cover.cut_ratio()}
        if node.contribution > node.level_bound * (1.0 + 1e-9):
            raise InvariantViolation("balanced cut exceeds its per-level bound", node.to_dict())
        logger.debug("depth %d: balanced step (i*=%d, j*=%d) net %d, cut %d edges",
                     depth, i_star, j_star, len(cover.terminals), node.contribution)

        parts = [s for s in cover.clusters if s]
        rest = frozenset(range(g.vertex_count)) - cover.vertices()
        if rest:
            parts.append(rest)
        parts.sort(key=min)
        node.children = self._map(
            [lambda part=part: self._multi(g.subgraph(part).without_lengths(), a.select(part),
                                           phi, depth + 1)
             for part in parts],
            depth,
        )
        self._check_mass(node, equal=True)
        return node

    @staticmethod
    def _check_mass(node: AuditNode, equal: bool) -> None:
        below = sum(child.total_mass for child in node.children)
        if below > node.total_mass or (equal and below != node.total_mass):
            raise InvariantViolation("recursion children do not partition the parent mass",
                                     node.to_dict())


def ed(g: Graph, a: NodeWeighting, phi: float, solver: str = "exact",
       epsilon: float = 0.1, **options) -> Decomposition:
    """ED(G, A, φ); see :class:`ExpanderDecomposer`."""
    return ed_multi(g, a, phi, solver=solver, epsilon=epsilon, **options)


def ed_multi(g: Graph, a: Optional[NodeWeighting] = None, phi: float = 1.0,
             solver: str = "exact", epsilon: float = 0.1,
             config: Optional[DecompositionConfig] = None, **options) -> Decomposition:
    """
    ED on every connected component of ``g``, results unioned.

    Args:
        g: Any graph
        a: Node-weighting (degrees when omitted)
        phi: Expansion parameter φ > 0
        solver: "exact", "mwu" or "auto"
        epsilon: MWU accuracy
        config: Full configuration; overrides ``solver``, ``epsilon`` and ``options``
        **options: Further :class:`DecompositionConfig` fields

    Returns:
        Decomposition: Removed edges, components and audit tree
    """
    if config is None:
        config = DecompositionConfig(solver=solver, epsilon=epsilon, **options)
    a = NodeWeighting.degrees(g) if a is None else a
    return ExpanderDecomposer(config).decompose(g, a, phi)
