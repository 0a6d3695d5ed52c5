"""Semidefinite approximations of the matrix logarithm and related cones.

Rational approximants of operator monotone functions come from Gaussian
quadrature of their integral representations; their hypographs and
perspectives are written as block LMIs and solved by an embedded
primal-dual interior-point method.
"""

from .errors import ConvergenceError, DomainError, NumericalError, ParseError, ShapeError
from .lmi import COMPLEX, REAL, Affine, LinearMatrixSystem

__version__ = "0.1.0"

__all__ = [
    "COMPLEX", "REAL", "Affine", "ConvergenceError", "DomainError", "LinearMatrixSystem",
    "NumericalError", "ParseError", "ShapeError", "__version__",
]
