"""Block SDPs: compilation from LMI systems, an interior-point solver and SDPA files."""

from .api import FeasibilityResult, OptimizationResult, feasibility, optimize
from .compile import compile_system
from .problem import BlockSDP, SdpBlock, SdpSolution
from .sdpa import export_sdpa, import_sdpa
from .solver import SolverOptions, solve

__all__ = [
    "BlockSDP", "FeasibilityResult", "OptimizationResult", "SdpBlock", "SdpSolution", "SolverOptions",
    "compile_system", "export_sdpa", "feasibility", "import_sdpa", "optimize", "solve",
]
