#!/usr/bin/env python3
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.table import Table

from .bench import DEFAULT_PHI_GRID, run_bench, write_csv
from .config import SOLVERS, DecompositionConfig, VerifyConfig
from .decomp import Decomposition, ed_multi
from .errors import (ConfigurationError, FlowDecompError, IntegrityError, InvariantViolation,
                     ParseError)
from .generators import corpus, write_corpus
from .graph import NodeWeighting, components
from .io import (AUDIT_FORMAT, REPORT_FORMAT, read_cut, read_edge_list, read_json,
                 read_node_weighting, write_cut, write_json)
from .log import configure_logging
from .verify import audit_overhead, verify_decomposition

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3

console = Console()


def _error(message: str) -> None:
    print(f"Error: {message}", file=sys.stderr)


def _load(args):
    g = read_edge_list(args.graph)
    if args.weights:
        a = read_node_weighting(args.weights, g.vertex_count)
    else:
        a = NodeWeighting.degrees(g)
    return g, a


def _out_dir(args) -> Path:
    out = Path(args.out_dir) if args.out_dir else Path(args.graph).parent
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> DecompositionConfig:
    return DecompositionConfig(solver=args.solver, epsilon=args.epsilon,
                               inflate_phi=args.inflate_phi, seed=args.seed,
                               max_workers=args.workers).validate()


def cmd_decompose(args) -> int:
    """Decompose a graph and write ``<stem>.cut`` and ``<stem>.audit.json``."""
    stem = Path(args.graph).stem
    out = None
    try:
        g, a = _load(args)
        out = _out_dir(args)
        d = ed_multi(g, a, args.phi, config=_config(args))
    except ParseError as e:
        _error(str(e))
        return EXIT_PARSE
    except InvariantViolation as e:
        failure = (out or Path(".")) / f"{stem}.failure.json"
        write_json({"error": str(e), "context": e.audit}, failure)
        _error(f"{e} (audit context written to {failure})")
        return EXIT_INVARIANT
    except FlowDecompError as e:
        _error(str(e))
        return EXIT_ERROR

    cut_path = write_cut(g, d.removed, out / f"{stem}.cut")
    audit_path = write_json(d.to_dict(), out / f"{stem}.audit.json")
    table = Table(title=f"Decomposition of {args.graph}")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("vertices / edges", f"{g.vertex_count} / {g.edge_count}")
    table.add_row("|A|", str(a.total()))
    table.add_row("phi (run)", f"{d.run_phi:.6g}")
    table.add_row("removed edges", str(len(d.removed)))
    table.add_row("components", str(len(d.components)))
    table.add_row("overhead ratio", f"{d.overhead_ratio():.6g}")
    table.add_row("recursion depth", str(d.depth))
    table.add_row("certified flow expansion", f"{d.certified_phi:.6g}")
    console.print(table)
    console.print(f"Wrote {cut_path} and {audit_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    """Check a stored decomposition; nonzero exit on any failed check."""
    stem = Path(args.graph).stem
    try:
        if args.audit is None and args.phi is None:
            raise ConfigurationError("verify needs --phi or --audit")
        g, a = _load(args)
        out = _out_dir(args)
        cut_path = Path(args.cut) if args.cut else out / f"{stem}.cut"
        removed = read_cut(g, cut_path)
        audit = None
        if args.audit:
            audit = Decomposition.from_dict(read_json(args.audit, AUDIT_FORMAT))
        if audit is not None:
            certified = audit.certified_phi
        else:
            run = _config(args)
            exact = all(run.solver_for(len(part)) == "exact" for part in components(g, removed))
            certified = run.certified_phi(args.phi, exact=exact)
        config = VerifyConfig(strict=args.strict, max_workers=args.workers)
        report = verify_decomposition(g, a, removed, 2.0 * certified, config)
        overhead = audit_overhead(audit, g=g) if audit is not None else None
    except ParseError as e:
        _error(str(e))
        return EXIT_PARSE
    except (IntegrityError, InvariantViolation) as e:
        _error(str(e))
        return EXIT_INVARIANT
    except FlowDecompError as e:
        _error(str(e))
        return EXIT_ERROR

    if audit is not None and set(audit.removed) != set(removed):
        _error("cut file does not match the audit's removed edges")
        return EXIT_INVARIANT

    payload = report.to_dict()
    if overhead is not None:
        payload["overhead"] = overhead.to_dict()
    report_path = write_json(payload, out / f"{stem}.verify.json", REPORT_FORMAT)

    table = Table(title=f"Verification of {cut_path}")
    table.add_column("component size", justify="right")
    table.add_column("|A|", justify="right")
    table.add_column("kappa", justify="right")
    table.add_column("status")
    for r in report.reports:
        kappa = "-" if r.kappa_product is None else f"{r.kappa_product:.6g}"
        table.add_row(str(len(r.component)), str(r.total_mass), kappa, r.status)
    console.print(table)
    if overhead is not None:
        console.print(f"Overhead ratio {overhead.ratio:.6g} (bound uses beta = {overhead.beta:.6g})")
    console.print(f"Wrote {report_path}")

    if report.unverified:
        print(f"Warning: {len(report.unverified)} component(s) unverified", file=sys.stderr)
    if not report.passed:
        _error(f"{len(report.failed)} component(s) failed verification")
        return EXIT_INVARIANT
    if overhead is not None and not overhead.within_bound:
        _error("; ".join(overhead.violations))
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_bench(args) -> int:
    """Run ED and the baseline over a corpus and write one CSV row per run."""
    try:
        if args.corpus == "default":
            instances = corpus(seed=args.seed)
        elif args.corpus == "small":
            instances = corpus(seed=args.seed, small=True)
        else:
            files = sorted(Path(args.corpus).glob("*.el"))
            if not files:
                raise ConfigurationError(f"no .el files in {args.corpus}")
            instances = [(f.stem, read_edge_list(f)) for f in files]
        phis = args.phi_grid or list(DEFAULT_PHI_GRID)
        rows = run_bench(instances, phis, _config(args), args.workers, not args.no_verify)
    except ParseError as e:
        _error(str(e))
        return EXIT_PARSE
    except FlowDecompError as e:
        _error(str(e))
        return EXIT_ERROR

    path = write_csv(rows, args.csv)
    failed = [r for r in rows if r.verified in ("failed", "error")]
    console.print(f"Wrote {len(rows)} rows to {path}")
    if failed:
        _error(f"{len(failed)} run(s) failed or could not be verified")
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_generate(args) -> int:
    """Write the benchmark corpus as edge lists."""
    instances = corpus(seed=args.seed, small=args.small)
    written = write_corpus(args.out_dir or "corpus", instances)
    console.print(f"Wrote {len(written)} instances")
    return EXIT_OK


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("Solver Options")
    group.add_argument("--solver", choices=SOLVERS, default="auto",
                       help="Flow solver: exact LP, multiplicative weights, or auto by size (default: auto)")
    group.add_argument("--epsilon", type=float, default=0.1,
                       help="Accuracy of the mwu solver (default: 0.1)")
    group.add_argument("--inflate-phi", action="store_true",
                       help="Run at phi/(1-epsilon) so mwu runs keep the exact guarantee")
    group.add_argument("--seed", type=int, default=0,
                       help="Seed for generated instances (default: 0)")
    group.add_argument("--workers", type=int, default=1,
                       help="Worker threads (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowdecomp",
        description="Flow-expander decomposition of graphs with node-weightings",
        epilog='''examples:
  # Decompose a hypercube at phi = 0.25 (writes q3.cut and q3.audit.json)
  %(prog)s decompose --graph q3.el --phi 0.25

  # Use an explicit node-weighting instead of the degrees
  %(prog)s decompose --graph q3.el --weights w.nw --phi 0.25

  # Force the exact LP solver
  %(prog)s decompose --graph q3.el --phi 0.25 --solver exact

  # Check a stored decomposition against its audit
  %(prog)s verify --graph q3.el --audit q3.audit.json

  # Compare against the cut-and-recurse baseline
  %(prog)s bench --corpus default --csv bench.csv

  # Write the benchmark corpus as edge lists
  %(prog)s generate --out-dir corpus''',
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    decompose = sub.add_parser("decompose", help="Decompose a graph")
    decompose.add_argument("--graph", "-g", required=True, help="Edge-list file")
    decompose.add_argument("--weights", "-w", help="Node-weighting file (default: degrees)")
    decompose.add_argument("--phi", type=float, required=True, help="Expansion parameter")
    decompose.add_argument("--out-dir", "-o", help="Output directory (default: next to the graph)")
    _add_run_options(decompose)
    decompose.set_defaults(func=cmd_decompose)

    verify = sub.add_parser("verify", help="Verify a stored decomposition")
    verify.add_argument("--graph", "-g", required=True, help="Edge-list file")
    verify.add_argument("--weights", "-w", help="Node-weighting file (default: degrees)")
    verify.add_argument("--cut", help="Cut file (default: <out-dir>/<stem>.cut)")
    verify.add_argument("--audit", help="Audit file written by decompose")
    verify.add_argument("--phi", type=float, help="Expansion parameter when no audit is given")
    verify.add_argument("--strict", action="store_true",
                        help="Fail on components too large to verify")
    verify.add_argument("--out-dir", "-o", help="Output directory (default: next to the graph)")
    _add_run_options(verify)
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="Benchmark against the cut-and-recurse baseline")
    bench.add_argument("--corpus", default="default",
                       help="'default', 'small' or a directory of .el files (default: default)")
    bench.add_argument("--csv", default="bench.csv", help="Output CSV (default: bench.csv)")
    bench.add_argument("--phi-grid", type=float, nargs="+",
                       help="Values of phi (default: 2^-k for k = 0..10)")
    bench.add_argument("--no-verify", action="store_true", help="Skip the component checks")
    _add_run_options(bench)
    bench.set_defaults(func=cmd_bench)

    generate = sub.add_parser("generate", help="Write the benchmark corpus")
    generate.add_argument("--out-dir", "-o", help="Output directory (default: corpus)")
    generate.add_argument("--seed", type=int, default=0, help="Seed (default: 0)")
    generate.add_argument("--small", action="store_true", help="Only instances with <= 32 vertices")
    generate.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    if getattr(args, "phi", None) is not None and args.phi <= 0:
        _error("--phi must be positive")
        return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
