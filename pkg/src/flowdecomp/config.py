"""Run configuration for decompositions and verification."""
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigurationError

SOLVERS = ("auto", "exact", "mwu")


@dataclass(frozen=True)
class DecompositionConfig:
    """
    Settings for one decomposition run.

    Args:
        solver: "exact", "mwu" or "auto" (exact up to ``exact_vertex_limit`` vertices)
        epsilon: Relative accuracy of the MWU solver, in (0, 1/2]
        exact_vertex_limit: Largest component solved with the exact LP under "auto"
        inflate_phi: Run the recursion at phi/(1-epsilon) when MWU is in use
        c0: Audited constant of the balanced-case boundary bound
        c1: Audited constant of the overall overhead bound
        c_cover: Audited constant of the cluster cover cut-size bound
        tolerance: Relative tolerance of distance and threshold comparisons
        seed: Seed recorded with the run (solvers are deterministic)
        max_workers: Worker threads for independent recursion children
    """

    solver: str = "auto"
    epsilon: float = 0.1
    exact_vertex_limit: int = 256
    inflate_phi: bool = False
    c0: float = 64.0
    c1: float = 64.0
    c_cover: float = 4.0
    tolerance: float = 1e-9
    seed: int = 0
    max_workers: int = 1

    def validate(self) -> "DecompositionConfig":
        if self.solver not in SOLVERS:
            raise ConfigurationError(
                f"Unknown solver {self.solver!r}; expected one of {', '.join(SOLVERS)}"
            )
        if self.solver != "exact" and not 0.0 < self.epsilon <= 0.5:
            raise ConfigurationError("epsilon must lie in (0, 1/2] for the MWU solver")
        if self.exact_vertex_limit < 1:
            raise ConfigurationError("exact_vertex_limit must be positive")
        if min(self.c0, self.c1, self.c_cover) <= 0:
            raise ConfigurationError("audited constants must be positive")
        if self.max_workers < 1:
            raise ConfigurationError("max_workers must be at least 1")
        return self

    def solver_for(self, vertex_count: int) -> str:
        """Pick the concrete solver for a component with ``vertex_count`` vertices."""
        if self.solver == "auto":
            return "exact" if vertex_count <= self.exact_vertex_limit else "mwu"
        return self.solver

    def effective_phi(self, phi: float) -> float:
        """Expansion parameter the recursion actually runs at."""
        if self.inflate_phi and self.solver != "exact":
            return phi / (1.0 - self.epsilon)
        return phi

    def certified_phi(self, phi: float, exact: Optional[bool] = None) -> float:
        """
        Expansion every output component is certified at (flow-expanding).

        Args:
            phi: Requested φ
            exact: Whether every gate of the run was decided by the exact LP;
                defaults to ``solver == "exact"``
        """
        run_phi = self.effective_phi(phi)
        if exact is None:
            exact = self.solver == "exact"
        if exact:
            return run_phi / 2.0
        return run_phi * (1.0 - self.epsilon) / 2.0


@dataclass(frozen=True)
class VerifyConfig:
    """
    Settings for the verification oracles.

    Args:
        exact_vertex_limit: Largest component checked with the exact LP
        brute_force_limit: Largest component also checked by cut enumeration
        strict: Treat unverified components as failures
        tolerance: Absolute slack on congestion comparisons
        max_workers: Worker threads for independent component checks
    """

    exact_vertex_limit: int = 256
    brute_force_limit: int = 14
    strict: bool = False
    tolerance: float = 1e-6
    max_workers: int = 1
