"""Standard-form block SDP data.

The problem is

    minimize   b^T y
    subject to S_l = sum_i y_i F_i^l - F_0^l  PSD  for every block l,

with dual  maximize sum_l <F_0^l, X_l>  s.t.  sum_l <F_i^l, X_l> = b_i, X_l PSD.
Each block stores F_1..F_p as a sparse p x s^2 matrix of row-major
vectorizations, so a variable that does not touch a block costs nothing.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp


@dataclass
class SdpBlock:
    size: int
    F0: np.ndarray  # dense symmetric s x s
    A: sp.csr_matrix  # p x s^2, row i = vec(F_i)
    diagonal: bool = False
    label: str = ""

    def F(self, i: int) -> np.ndarray:
        return self.A.getrow(i).toarray().reshape(self.size, self.size)

    def touching(self) -> np.ndarray:
        """Indices of variables with a nonzero matrix in this block."""
        return np.unique(self.A.tocoo().row)


@dataclass
class BlockSDP:
    num_vars: int
    b: np.ndarray
    blocks: List[SdpBlock]
    offset: float = 0.0
    sign: float = 1.0  # reported objective = sign * (b^T y + offset)
    recover: Optional[Callable] = field(default=None, repr=False)
    shift_index: Optional[int] = None  # feasibility shift variable, if any

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (self.num_vars,):
            raise ValueError("cost vector length must equal the number of variables")
        for blk in self.blocks:
            if blk.F0.shape != (blk.size, blk.size) or blk.A.shape != (self.num_vars, blk.size**2):
                raise ValueError(f"inconsistent dimensions in block {blk.label!r}")

    @property
    def total_dim(self) -> int:
        return sum(blk.size for blk in self.blocks)

    def slack(self, y) -> List[np.ndarray]:
        """S_l(y) = sum_i y_i F_i - F_0 for every block."""
        y = np.asarray(y, dtype=float)
        out = []
        for blk in self.blocks:
            S = (blk.A.T @ y).reshape(blk.size, blk.size) - blk.F0
            out.append(0.5 * (S + S.T))
        return out

    def value(self, y) -> float:
        return self.sign * (float(self.b @ y) + self.offset)


@dataclass
class SdpSolution:
    y: np.ndarray
    objective: float  # primal objective in the caller's sense (includes offset)
    dual_objective: float
    X: List[np.ndarray]
    S: List[np.ndarray]
    primal_infeasibility: float
    dual_infeasibility: float
    gap: float
    status: str  # "optimal" | "infeasible-certificate" | "max-iterations" | "stalled"
    iterations: int

    @property
    def residuals(self) -> dict:
        return {
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
            "gap": self.gap,
        }
