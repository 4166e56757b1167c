from .baseline import cut_and_recurse
from .config import DecompositionConfig, VerifyConfig
from .cover import ClusterCover, build_net, cluster
from .decomp import Decomposition, ExpanderDecomposer, compute_scales, ed, ed_multi
from .errors import FlowDecompError
from .flow_lp import Expanding, NotExpanding, routability_gate, solve_exact, solve_mwu
from .graph import Graph, NodeWeighting
from .sweep import heavy_core, sweep_cut
from .verify import (audit_overhead, brute_force_cut_expansion, check_flow_expansion,
                     two_hop_route, verify_decomposition)

__version__ = "0.1.0"
__all__ = [
    "ClusterCover",
    "Decomposition",
    "DecompositionConfig",
    "ExpanderDecomposer",
    "Expanding",
    "FlowDecompError",
    "Graph",
    "NodeWeighting",
    "NotExpanding",
    "VerifyConfig",
    "audit_overhead",
    "brute_force_cut_expansion",
    "build_net",
    "check_flow_expansion",
    "cluster",
    "compute_scales",
    "cut_and_recurse",
    "ed",
    "ed_multi",
    "heavy_core",
    "routability_gate",
    "solve_exact",
    "solve_mwu",
    "sweep_cut",
    "two_hop_route",
    "verify_decomposition",
]
