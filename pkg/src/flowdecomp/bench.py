"""
Benchmark ED against the cut-and-recurse baseline over a corpus and a φ grid.
"""
import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .baseline import cut_and_recurse
from .config import DecompositionConfig, VerifyConfig
from .decomp import Decomposition, ed_multi
from .errors import FlowDecompError
from .graph import Graph, NodeWeighting
from .verify import verify_decomposition

logger = logging.getLogger(__name__)

DEFAULT_PHI_GRID = tuple(2.0 ** -k for k in range(11))
ALGORITHMS = ("ed", "baseline")


@dataclass(frozen=True)
class BenchRow:
    """One (instance, φ, algorithm) measurement."""

    instance: str
    vertices: int
    edges: int
    phi: float
    algorithm: str
    removed: int
    ratio: float
    seconds: float
    depth: int
    verified: str
    error: str = ""


def _verdict(g: Graph, a: NodeWeighting, d: Decomposition, limit: int) -> str:
    report = verify_decomposition(g, a, d.removed, 2.0 * d.certified_phi,
                                  VerifyConfig(exact_vertex_limit=limit, brute_force_limit=0))
    if report.failed:
        return "failed"
    return "unverified" if report.unverified else "certified"


def run_instance(name: str, g: Graph, phi: float, algorithm: str,
                 config: DecompositionConfig, verify: bool = True) -> BenchRow:
    """Run one algorithm on one instance; failures become rows with an error message."""
    a = NodeWeighting.degrees(g)
    start = time.perf_counter()
    try:
        if algorithm == "ed":
            d = ed_multi(g, a, phi, config=config)
        else:
            d = cut_and_recurse(g, a, phi, config)
        seconds = time.perf_counter() - start
        verified = _verdict(g, a, d, config.exact_vertex_limit) if verify else "skipped"
    except FlowDecompError as e:
        logger.error("%s at phi=%g (%s) failed: %s", name, phi, algorithm, e)
        return BenchRow(name, g.vertex_count, g.edge_count, phi, algorithm, -1,
                        float("nan"), time.perf_counter() - start, 0, "error", str(e))
    return BenchRow(name, g.vertex_count, g.edge_count, phi, algorithm, len(d.removed),
                    d.overhead_ratio(), seconds, d.depth, verified)


def run_bench(instances: Sequence[Tuple[str, Graph]], phis: Iterable[float] = DEFAULT_PHI_GRID,
              config: Optional[DecompositionConfig] = None, max_workers: int = 1,
              verify: bool = True) -> List[BenchRow]:
    """
    Measure both algorithms on every (instance, φ) pair.

    Instances run concurrently when ``max_workers`` > 1; rows come back in
    (instance, φ, algorithm) order regardless.
    """
    config = config or DecompositionConfig()
    jobs = [(name, g, phi, algorithm)
            for name, g in instances for phi in phis for algorithm in ALGORITHMS]
    logger.info("benchmark: %d runs on %d workers", len(jobs), max_workers)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(run_instance, *job, config, verify) for job in jobs]
            return [f.result() for f in futures]
    return [run_instance(*job, config, verify) for job in jobs]


def write_csv(rows: Iterable[BenchRow], path: Union[str, Path]) -> Path:
    """Write benchmark rows with a header line."""
    path = Path(path)
    names = [f.name for f in fields(BenchRow)]
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=names)
        writer.writeheader()
        for row in rows:
            record = asdict(row)
            record["phi"] = f"{row.phi:.12g}"
            record["ratio"] = f"{row.ratio:.12g}"
            record["seconds"] = f"{row.seconds:.6f}"
            writer.writerow(record)
    return path
