"""Convenience entry points: optimize over a LinearMatrixSystem or decide feasibility."""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..lmi import LinearMatrixSystem
from .compile import compile_system
from .problem import SdpSolution
from .solver import SolverOptions, solve

FEASIBILITY_TOL = 0.0


@dataclass
class OptimizationResult:
    value: float
    assignment: Dict[str, np.ndarray]
    solution: SdpSolution

    @property
    def status(self) -> str:
        return self.solution.status


def optimize(system: LinearMatrixSystem, objective: dict, fixings: Optional[dict] = None,
             sense: str = "min", options: Optional[SolverOptions] = None, **kwargs) -> OptimizationResult:
    problem = compile_system(system, objective, fixings, sense)
    sol = solve(problem, options, **kwargs)
    return OptimizationResult(sol.objective, problem.recover(sol.y), sol)


@dataclass
class FeasibilityResult:
    feasible: bool
    shift: float  # optimal s in "block + s I is PSD"; <= 0 means feasible
    solution: SdpSolution


def feasibility(system: LinearMatrixSystem, fixings: Optional[dict] = None, tol: float = FEASIBILITY_TOL,
                options: Optional[SolverOptions] = None, **kwargs) -> FeasibilityResult:
    """Decide whether the fixed system has a solution.

    Minimizes the shift s subject to every block + s I being PSD (s >= -1).
    The system is declared feasible when s* <= tol.
    """
    problem = compile_system(system, None, fixings, feasibility=True)
    sol = solve(problem, options, **kwargs)
    s = float(sol.y[problem.shift_index])
    return FeasibilityResult(s <= tol, s, sol)
