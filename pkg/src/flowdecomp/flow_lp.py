"""
Concurrent multicommodity flow for the A-product demand.

Commodities are grouped by source: the commodity of source ``u`` carries
D_A(u, v) to every sink ``v`` of the support with ``v > u``, so each unordered
pair is routed exactly once. Flows live on arcs; arc ``2e`` runs from
``edges[e, 0]`` to ``edges[e, 1]`` and arc ``2e + 1`` back.
"""
import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse
from scipy.optimize import linprog

from .errors import ContractError, InfeasibleError, InvariantViolation, SolverError
from .graph import (Graph, NodeWeighting, components, demand_distance_sum,
                    shortest_path_tree)

logger = logging.getLogger(__name__)

STRONG_DUALITY_TOLERANCE = 1e-6
CONSERVATION_TOLERANCE = 1e-9
MWU_STEP_CONSTANT = 10.0


@dataclass(frozen=True, eq=False)
class FlowCertificate:
    """
    A routing of the A-product demand.

    Args:
        kappa: Congestion of the routing (max total load over undirected edges)
        sources: Source vertex of each commodity row
        flow: Array of shape (len(sources), 2m) with per-commodity arc flows
        sink_demand: Array of shape (len(sources), n); D_A(u, v) for sinks v > u
        epsilon: Relative accuracy of the solve (0 for the exact LP)
    """

    kappa: float
    sources: Tuple[int, ...]
    flow: np.ndarray = field(repr=False)
    sink_demand: np.ndarray = field(repr=False)
    epsilon: float = 0.0

    @property
    def per_source_edge_flow(self) -> Dict[Tuple[int, int], float]:
        """Nonzero flows keyed by (source vertex, arc id)."""
        out: Dict[Tuple[int, int], float] = {}
        for i, s in enumerate(self.sources):
            for arc in np.flatnonzero(self.flow[i] > 0):
                out[(s, int(arc))] = float(self.flow[i, arc])
        return out

    def edge_loads(self) -> np.ndarray:
        """Total flow per undirected edge, both directions and all commodities."""
        if self.flow.size == 0:
            return np.zeros(self.flow.shape[1] // 2)
        per_arc = self.flow.sum(axis=0)
        return per_arc[0::2] + per_arc[1::2]

    def max_load(self) -> float:
        loads = self.edge_loads()
        return float(loads.max()) if loads.size else 0.0

    def conservation_residual(self, g: Graph) -> float:
        """Largest relative violation of flow conservation over all commodities."""
        worst = 0.0
        tails = np.concatenate([g.edges[:, [0]], g.edges[:, [1]]], axis=1).reshape(-1)
        heads = np.concatenate([g.edges[:, [1]], g.edges[:, [0]]], axis=1).reshape(-1)
        for i, s in enumerate(self.sources):
            net = (np.bincount(tails, weights=self.flow[i], minlength=g.vertex_count)
                   - np.bincount(heads, weights=self.flow[i], minlength=g.vertex_count))
            expected = -self.sink_demand[i].copy()
            expected[s] += self.sink_demand[i].sum()
            scale = max(1.0, float(self.sink_demand[i].sum()))
            worst = max(worst, float(np.abs(net - expected).max()) / scale)
        return worst

    def digest(self) -> str:
        """Short stable fingerprint used in audit trails."""
        h = hashlib.sha256()
        h.update(f"{self.kappa:.9g}".encode())
        h.update(np.round(self.flow, 9).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class DualLengths:
    """
    A length function certifying a lower bound on the optimal congestion.

    Args:
        lengths: Nonnegative length per edge, summing to at most 1
        objective: Σ_{u<v} D_A(u, v) dist_ℓ(u, v)
    """

    lengths: np.ndarray = field(repr=False)
    objective: float

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def recompute_objective(self, g: Graph, a: NodeWeighting) -> float:
        return demand_distance_sum(g, a, self.lengths)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.round(self.lengths, 9).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class Expanding:
    """Gate verdict: the product demand routes with congestion below 1/φ (up to solver slack)."""

    certificate: FlowCertificate
    lengths: DualLengths

    @property
    def kappa(self) -> float:
        return self.certificate.kappa


@dataclass(frozen=True)
class NotExpanding:
    """Gate verdict: ``lengths`` has Σℓ ≤ 1 and demand-weighted distance ≥ 1/φ."""

    lengths: DualLengths
    certificate: FlowCertificate

    @property
    def kappa(self) -> float:
        return self.certificate.kappa


GateVerdict = Union[Expanding, NotExpanding]


def _commodities(a: NodeWeighting) -> Tuple[List[int], np.ndarray]:
    support = a.support()
    total = a.total()
    mass = a.mass.astype(np.float64)
    sources = support[:-1]
    sink_demand = np.zeros((len(sources), len(a)))
    for i, s in enumerate(sources):
        later = [v for v in support if v > s]
        sink_demand[i, later] = mass[s] * mass[later] / total
    return sources, sink_demand


def _require_connected_support(g: Graph, a: NodeWeighting) -> None:
    support = a.support()
    if len(support) < 2:
        return
    label = {}
    for index, comp in enumerate(components(g)):
        for v in comp:
            label[v] = index
    if len({label[v] for v in support}) > 1:
        raise InfeasibleError(
            "positive demand joins different connected components; split the graph first"
        )


def _trivial(g: Graph, a: NodeWeighting, epsilon: float) -> Tuple[FlowCertificate, DualLengths]:
    m = g.edge_count
    n = g.vertex_count
    lengths = np.full(m, 1.0 / m) if m else np.zeros(0)
    cert = FlowCertificate(0.0, (), np.zeros((0, 2 * m)), np.zeros((0, n)), epsilon)
    return cert, DualLengths(lengths, 0.0)


def _check_duality(cert: FlowCertificate, dual: DualLengths, slack: float) -> None:
    if dual.total_length > 1.0 + 1e-9:
        raise InvariantViolation(f"dual lengths sum to {dual.total_length} > 1")
    if dual.objective > cert.kappa * (1.0 + slack) + 1e-12:
        raise InvariantViolation(
            f"weak duality violated: dual objective {dual.objective} > kappa {cert.kappa}"
        )


def solve_exact(g: Graph, a: NodeWeighting) -> Tuple[FlowCertificate, DualLengths]:
    """
    Solve the compact concurrent-flow LP exactly with HiGHS.

    The primal carries one arc-flow vector per source commodity plus κ; the
    dual lengths are the negated multipliers of the edge capacity rows.

    Raises:
        InfeasibleError: If positive demand spans several components
        SolverError: If HiGHS fails or strong duality does not hold
    """
    if a.total() <= 0:
        raise ContractError("solve_exact needs |A| > 0")
    _require_connected_support(g, a)
    sources, sink_demand = _commodities(a)
    if not sources or g.edge_count == 0:
        return _trivial(g, a, 0.0)

    n, m, k = g.vertex_count, g.edge_count, len(sources)
    arcs = np.arange(2 * m)
    tails = np.where(arcs % 2 == 0, g.edges[arcs // 2, 0], g.edges[arcs // 2, 1])
    heads = np.where(arcs % 2 == 0, g.edges[arcs // 2, 1], g.edges[arcs // 2, 0])
    incidence = scipy.sparse.coo_matrix(
        (np.concatenate([np.ones(2 * m), -np.ones(2 * m)]),
         (np.concatenate([tails, heads]), np.concatenate([arcs, arcs]))),
        shape=(n, 2 * m),
    ).tocsr()
    a_eq = scipy.sparse.hstack([scipy.sparse.kron(scipy.sparse.identity(k), incidence),
                                scipy.sparse.csr_matrix((k * n, 1))]).tocsr()
    b_eq = np.empty(k * n)
    for i, s in enumerate(sources):
        supply = -sink_demand[i]
        supply[s] += sink_demand[i].sum()
        b_eq[i * n:(i + 1) * n] = supply

    arc_to_edge = scipy.sparse.coo_matrix((np.ones(2 * m), (arcs // 2, arcs)), shape=(m, 2 * m))
    a_ub = scipy.sparse.hstack([scipy.sparse.kron(np.ones((1, k)), arc_to_edge),
                                -np.ones((m, 1))]).tocsr()
    b_ub = np.zeros(m)
    c = np.zeros(k * 2 * m + 1)
    c[-1] = 1.0

    logger.debug("exact LP: n=%d m=%d commodities=%d variables=%d", n, m, k, c.size)
    try:
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                      method="highs-ipm",
                      options={"primal_feasibility_tolerance": 1e-10,
                               "dual_feasibility_tolerance": 1e-10})
    except ValueError as e:
        raise SolverError(f"HiGHS rejected the concurrent-flow LP: {e}") from e
    if not res.success:
        raise SolverError(f"concurrent-flow LP failed: {res.message}")

    flow = np.clip(res.x[:-1], 0.0, None).reshape(k, 2 * m)
    kappa = float(res.fun)
    cert = FlowCertificate(kappa, tuple(sources), flow, sink_demand, 0.0)

    lengths = np.clip(-np.asarray(res.ineqlin.marginals, dtype=np.float64), 0.0, None)
    if lengths.sum() > 0:
        lengths = lengths / lengths.sum()
    else:
        lengths = np.full(m, 1.0 / m)
    dual = DualLengths(lengths, demand_distance_sum(g, a, lengths))

    _check_duality(cert, dual, STRONG_DUALITY_TOLERANCE)
    if abs(kappa - dual.objective) > STRONG_DUALITY_TOLERANCE * max(1.0, kappa):
        raise SolverError(
            f"strong duality gap too large: kappa={kappa} dual={dual.objective}", (cert, dual)
        )
    return cert, dual


def mwu_step_cap(edge_count: int, epsilon: float) -> int:
    """Routing-step budget 10·ε⁻²·m·log₂(m + 1) of the MWU solver."""
    m = max(edge_count, 1)
    return int(math.ceil(MWU_STEP_CONSTANT * m * math.log2(m + 1) / epsilon ** 2))


def solve_mwu(g: Graph, a: NodeWeighting, epsilon: float,
              max_steps: Optional[int] = None) -> Tuple[FlowCertificate, DualLengths]:
    """
    Approximate the concurrent-flow LP by multiplicative weights.

    Each phase routes every commodity on shortest paths under the current
    normalized edge weights (which double as a dual candidate), averages the
    routings weighted by the inverse of each phase's maximum edge load, then
    raises weights in proportion to that width-normalized load.
    Stops once the averaged congestion is within (1+ε) of the best dual.

    Args:
        g: Connected graph
        a: Node-weighting with |A| > 0
        epsilon: Target relative accuracy in (0, 1/2]
        max_steps: Override of the routing-step cap

    Returns:
        Tuple[FlowCertificate, DualLengths]: Averaged routing and the best dual seen

    Raises:
        SolverError: If the cap is reached first; ``best`` holds the best-so-far pair
    """
    if not 0.0 < epsilon <= 0.5:
        raise ContractError("epsilon must lie in (0, 1/2]")
    if a.total() <= 0:
        raise ContractError("solve_mwu needs |A| > 0")
    _require_connected_support(g, a)
    sources, sink_demand = _commodities(a)
    if not sources or g.edge_count == 0:
        return _trivial(g, a, epsilon)

    m, k = g.edge_count, len(sources)
    cap = mwu_step_cap(m, epsilon) if max_steps is None else max_steps
    eta = epsilon / 2.0
    weights = np.ones(m)
    flow_sum = np.zeros((k, 2 * m))
    weight_sum = 0.0
    best: Optional[DualLengths] = None
    steps = phases = 0

    while True:
        lengths = weights / weights.sum()
        phase_flow = np.zeros((k, 2 * m))
        objective = 0.0
        for i, s in enumerate(sources):
            dist, parent, order = shortest_path_tree(g, s, lengths)
            sinks = np.flatnonzero(sink_demand[i])
            if np.any(~np.isfinite(dist[sinks])):
                raise InfeasibleError("a sink is unreachable from its source")
            objective += float(np.dot(sink_demand[i, sinks], dist[sinks]))
            carried = sink_demand[i].copy()
            for v in reversed(order):
                arc = parent[v]
                if arc < 0 or carried[v] == 0.0:
                    continue
                phase_flow[i, arc] += carried[v]
                e = arc // 2
                upstream = g.edges[e, 0] if arc % 2 == 0 else g.edges[e, 1]
                carried[upstream] += carried[v]
            steps += 1
        phases += 1
        phase_per_arc = phase_flow.sum(axis=0)
        load = phase_per_arc[0::2] + phase_per_arc[1::2]
        width = float(load.max())
        scale = 1.0 / width if width > 0 else 1.0
        flow_sum += scale * phase_flow
        weight_sum += scale
        if best is None or objective > best.objective:
            best = DualLengths(lengths, objective)

        average = flow_sum / weight_sum
        per_arc = average.sum(axis=0)
        kappa = float((per_arc[0::2] + per_arc[1::2]).max())
        cert = FlowCertificate(kappa, tuple(sources), average, sink_demand, epsilon)
        if cert.kappa <= (1.0 + epsilon) * best.objective:
            logger.debug("MWU converged after %d phases: kappa=%.6g dual=%.6g",
                         phases, cert.kappa, best.objective)
            _check_duality(cert, best, 1e-9)
            return cert, best
        if steps >= cap:
            logger.warning("MWU hit its step cap (%d): kappa=%.6g dual=%.6g",
                           cap, cert.kappa, best.objective)
            raise SolverError(f"MWU did not converge within {cap} routing steps",
                              (cert, best))

        if width > 0:
            weights = weights * np.exp(eta * load / width)
            weights /= weights.max()


def solve(g: Graph, a: NodeWeighting, solver: str = "exact",
          epsilon: float = 0.1) -> Tuple[FlowCertificate, DualLengths]:
    """Dispatch to :func:`solve_exact` or :func:`solve_mwu`."""
    if solver == "exact":
        return solve_exact(g, a)
    if solver == "mwu":
        return solve_mwu(g, a, epsilon)
    raise ContractError(f"unknown solver {solver!r}")


def routability_gate(g: Graph, a: NodeWeighting, phi: float, solver: str = "exact",
                     epsilon: float = 0.1) -> GateVerdict:
    """
    Decide whether the A-product demand routes with congestion below 1/φ.

    A NotExpanding verdict is only issued when the dual itself certifies
    Σ D·dist_ℓ ≥ 1/φ; everything else is Expanding, with the primal κ
    bounding the congestion actually achieved.

    Raises:
        ContractError: If φ ≤ 0 or |A| = 0
        SolverError: Propagated from the solver
    """
    if phi <= 0:
        raise ContractError("phi must be positive")
    cert, dual = solve(g, a, solver, epsilon)
    if dual.objective >= 1.0 / phi:
        logger.debug("gate: not expanding (kappa=%.6g, dual=%.6g, 1/phi=%.6g)",
                     cert.kappa, dual.objective, 1.0 / phi)
        return NotExpanding(dual, cert)
    logger.debug("gate: expanding (kappa=%.6g, 1/phi=%.6g)", cert.kappa, 1.0 / phi)
    return Expanding(cert, dual)
