"""
Cut-and-recurse baseline: while the product demand does not route, cut along
the best sweep of the dual lengths and recurse on both sides.
"""
import logging
from dataclasses import asdict
from typing import Optional

from .config import DecompositionConfig
from .decomp import (CASE_BASE, CASE_EXPANDING, CASE_SPLIT, AuditNode, Decomposition,
                     certified_exactly)
from .errors import ContractError
from .flow_lp import NotExpanding, routability_gate
from .graph import Graph, NodeWeighting, boundary, components, shortest_path_lengths
from .sweep import scan_prefixes

logger = logging.getLogger(__name__)

CASE_SWEEP = "sweep"
SWEEP_SOURCES = 64


def _best_sweep(g: Graph, a: NodeWeighting):
    """Best prefix over sweeps from the heaviest support vertices."""
    sources = sorted(a.support(), key=lambda v: (-a[v], v))[:SWEEP_SOURCES]
    best = None
    for x in sources:
        scan = scan_prefixes(g, a, shortest_path_lengths(g, [x]))
        if best is None or scan.ratio < best[1].ratio:
            best = (x, scan)
    return best


def _recurse(g: Graph, a: NodeWeighting, phi: float, config: DecompositionConfig) -> AuditNode:
    parts = components(g)
    vertices = tuple(g.root_vertices(range(g.vertex_count)))
    if len(parts) > 1:
        node = AuditNode(CASE_SPLIT, vertices, a.total(), phi)
        node.children = [_recurse(g.subgraph(p), a.select(p), phi, config) for p in parts]
        return node
    total = a.total()
    if total <= 1 or len(a.support()) <= 1 or g.edge_count == 0:
        return AuditNode(CASE_BASE, vertices, total, phi)

    solver = config.solver_for(g.vertex_count)
    verdict = routability_gate(g, a, phi, solver, config.epsilon)
    node = AuditNode(CASE_EXPANDING, vertices, total, phi, kappa=verdict.kappa,
                     dual_objective=verdict.lengths.objective, solver=solver,
                     certificate=verdict.certificate.digest(),
                     lengths=verdict.lengths.digest())
    if not isinstance(verdict, NotExpanding):
        return node

    metric = g.with_lengths(verdict.lengths.lengths)
    source, scan = _best_sweep(metric, a)
    side = frozenset(scan.order[:scan.prefix_length])
    cut = boundary(g, side)
    node.case = CASE_SWEEP
    node.cut = tuple(g.root_edges(cut))
    node.contribution = len(cut)
    node.sweep = {"source": int(g.vertex_labels[source]), "ratio": scan.ratio}
    other = frozenset(range(g.vertex_count)) - side
    node.children = [_recurse(g.subgraph(s), a.select(s), phi, config)
                     for s in sorted([side, other], key=min)]
    return node


def cut_and_recurse(g: Graph, a: Optional[NodeWeighting], phi: float,
                    config: Optional[DecompositionConfig] = None) -> Decomposition:
    """
    Decompose with plain recursive sweep cuts on the LP duals.

    Components are certified the same way as by ED; only the cutting rule
    differs, so the two are comparable on |C|.

    Raises:
        ContractError: If φ ≤ 0
    """
    if phi <= 0:
        raise ContractError("phi must be positive")
    config = (config or DecompositionConfig()).validate()
    a = NodeWeighting.degrees(g) if a is None else a
    run_phi = config.effective_phi(phi)
    root = _recurse(g, a, run_phi, config)
    removed = tuple(sorted(set(e for node in root.walk() for e in node.cut)))
    logger.info("baseline removed %d edges, depth %d", len(removed), root.depth())
    certified = config.certified_phi(phi, exact=certified_exactly(root))
    return Decomposition(removed, components(g, removed), root, phi, run_phi, certified,
                         a.total(), "baseline", asdict(config))
