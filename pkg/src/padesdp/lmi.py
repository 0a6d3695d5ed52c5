"""Symbolic affine matrix expressions and linear matrix inequality systems.

An ``Affine`` expression is a constant matrix plus a sum of terms, each term
being a declared Hermitian variable pushed through a real-linear map (left
and right multiplication by constants, Kronecker lifting, entrywise
conjugation, block placement).  Maps are stored as callables, so an
expression can be evaluated at numeric values and, for compilation, applied
to basis matrices of each variable.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .errors import ShapeError
from .hermitian import hermitian, is_psd, lambda_min

REAL = "real"
COMPLEX = "complex"


@dataclass(frozen=True)
class Variable:
    name: str
    dim: int
    field: str = REAL
    role: str = "auxiliary"  # "input" or "auxiliary"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("variable dimension must be >= 1")
        if self.field not in (REAL, COMPLEX):
            raise ValueError(f"unknown field {self.field!r}")

    def basis(self) -> List[np.ndarray]:
        """Real basis of the space of Hermitian dim x dim matrices of this field."""
        n = self.dim
        out = []
        for i in range(n):
            E = np.zeros((n, n))
            E[i, i] = 1.0
            out.append(E)
        for i in range(n):
            for j in range(i + 1, n):
                E = np.zeros((n, n))
                E[i, j] = E[j, i] = 1.0
                out.append(E)
        if self.field == COMPLEX:
            for i in range(n):
                for j in range(i + 1, n):
                    E = np.zeros((n, n), dtype=complex)
                    E[i, j] = 1j
                    E[j, i] = -1j
                    out.append(E)
        return out

    @property
    def num_coords(self) -> int:
        n = self.dim
        return n * n if self.field == COMPLEX else n * (n + 1) // 2

    def coords(self, value) -> np.ndarray:
        """Coordinates of a Hermitian value in ``basis()``."""
        V = np.asarray(value).reshape(self.dim, self.dim)
        n = self.dim
        iu = np.triu_indices(n, 1)
        parts = [np.real(np.diag(V)), np.real(V[iu])]
        if self.field == COMPLEX:
            parts.append(np.imag(V[iu]))
        return np.concatenate(parts)

    def from_coords(self, z) -> np.ndarray:
        n = self.dim
        z = np.asarray(z, dtype=float)
        iu = np.triu_indices(n, 1)
        npair = len(iu[0])
        if self.field == COMPLEX:
            V = np.zeros((n, n), dtype=complex)
            V[iu] = z[n:n + npair] + 1j * z[n + npair:]
        else:
            V = np.zeros((n, n))
            V[iu] = z[n:n + npair]
        V = V + V.conj().T
        V[np.diag_indices(n)] = z[:n]
        return V


def _as_matrix(value) -> np.ndarray:
    A = np.asarray(value)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {A.shape}")
    return A


Term = Tuple[str, Callable[[np.ndarray], np.ndarray]]


class Affine:
    """const + sum over terms of map(variable)."""

    __slots__ = ("shape", "const", "terms")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, const, terms: Sequence[Term] = ()):
        self.const = _as_matrix(const)
        self.shape = self.const.shape
        self.terms = tuple(terms)

    @staticmethod
    def variable(v: Variable) -> "Affine":
        return Affine(np.zeros((v.dim, v.dim)), [(v.name, lambda V: V)])

    @staticmethod
    def constant(value) -> "Affine":
        return Affine(value)

    @staticmethod
    def lift(value) -> "Affine":
        return value if isinstance(value, Affine) else Affine(value)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Affine":
        """Apply a real-linear map to the whole expression."""
        const = _as_matrix(fn(self.const))
        return Affine(const, [(name, _compose(fn, f)) for name, f in self.terms])

    def __add__(self, other):
        other = Affine.lift(other)
        if other.shape != self.shape:
            raise ShapeError(f"cannot add shapes {self.shape} and {other.shape}")
        return Affine(self.const + other.const, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-Affine.lift(other))

    def __rsub__(self, other):
        return Affine.lift(other) + (-self)

    def __mul__(self, c):
        if isinstance(c, Affine):
            raise TypeError("products of affine expressions are not affine")
        c = complex(c) if np.iscomplexobj(c) else float(c)
        return self.map(lambda V, c=c: c * V)

    __rmul__ = __mul__

    def left(self, C) -> "Affine":
        C = np.asarray(C)
        return self.map(lambda V, C=C: C @ V)

    def right(self, C) -> "Affine":
        C = np.asarray(C)
        return self.map(lambda V, C=C: V @ C)

    def congruence(self, C) -> "Affine":
        """C @ expr @ C^*."""
        C = np.asarray(C)
        Ch = C.conj().T
        return self.map(lambda V, C=C, Ch=Ch: C @ V @ Ch)

    @property
    def H(self) -> "Affine":
        return self.map(lambda V: V.conj().T)

    def conj(self) -> "Affine":
        return self.map(np.conj)

    def kron_left(self, A) -> "Affine":
        """kron(A, expr)."""
        A = np.asarray(A)
        return self.map(lambda V, A=A: np.kron(A, V))

    def kron_right(self, B) -> "Affine":
        """kron(expr, B)."""
        B = np.asarray(B)
        return self.map(lambda V, B=B: np.kron(V, B))

    def trace(self) -> "Affine":
        return self.map(lambda V: np.trace(V).reshape(1, 1))

    def variables(self) -> set:
        return {name for name, _ in self.terms}

    def evaluate(self, assignment: Dict[str, np.ndarray]) -> np.ndarray:
        out = np.array(self.const, dtype=complex if np.iscomplexobj(self.const) else float)
        for name, f in self.terms:
            val = f(_as_matrix(assignment[name]))
            if np.iscomplexobj(val) and not np.iscomplexobj(out):
                out = out.astype(complex)
            out = out + val
        return out

    def linear_part(self, name: str, E: np.ndarray) -> np.ndarray:
        """Sum of all maps of variable ``name`` applied to E (no constant)."""
        out = np.zeros(self.shape)
        for n, f in self.terms:
            if n == name:
                val = f(E)
                if np.iscomplexobj(val) and not np.iscomplexobj(out):
                    out = out.astype(complex)
                out = out + val
        return out


def _compose(outer, inner):
    return lambda V: outer(inner(V))


def bmat(rows) -> Affine:
    """Block matrix from a grid of Affine / array / scalar / None (zero) entries.

    Row heights and column widths are inferred from the entries; a None entry
    needs another entry in its row and column to fix its size.
    """
    grid = [[None if e is None else Affine.lift(e) for e in row] for row in rows]
    nr, nc = len(grid), len(grid[0])
    heights = [None] * nr
    widths = [None] * nc
    for i in range(nr):
        for j in range(nc):
            e = grid[i][j]
            if e is not None:
                h, w = e.shape
                if heights[i] not in (None, h) or widths[j] not in (None, w):
                    raise ShapeError(f"inconsistent block sizes at ({i}, {j})")
                heights[i], widths[j] = h, w
    if None in heights or None in widths:
        raise ShapeError("could not infer all block sizes")
    r0 = np.concatenate([[0], np.cumsum(heights)])
    c0 = np.concatenate([[0], np.cumsum(widths)])
    R, C = int(r0[-1]), int(c0[-1])
    iscomplex = any(e is not None and np.iscomplexobj(e.const) for row in grid for e in row)
    const = np.zeros((R, C), dtype=complex if iscomplex else float)
    terms = []
    for i in range(nr):
        for j in range(nc):
            e = grid[i][j]
            if e is None:
                continue
            rs = slice(int(r0[i]), int(r0[i + 1]))
            cs = slice(int(c0[j]), int(c0[j + 1]))
            const[rs, cs] = e.const
            for name, f in e.terms:
                terms.append((name, _placer(f, rs, cs, (R, C))))
    return Affine(const, terms)


def _placer(f, rs, cs, shape):
    def place(V):
        val = f(V)
        out = np.zeros(shape, dtype=complex if np.iscomplexobj(val) else float)
        out[rs, cs] = val
        return out
    return place


@dataclass
class Block:
    label: str
    expr: Affine

    @property
    def size(self) -> int:
        return self.expr.shape[0]


@dataclass
class Equality:
    label: str
    expr: Affine  # constrained to equal zero


class LinearMatrixSystem:
    """Named Hermitian variables, PSD block constraints and linear equalities."""

    def __init__(self, name: str = "system"):
        self.name = name
        self.variables: Dict[str, Variable] = {}
        self.blocks: List[Block] = []
        self.equalities: List[Equality] = []

    # construction -----------------------------------------------------
    def add_variable(self, name: str, dim: int, field: str = REAL, role: str = "auxiliary") -> Affine:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        v = Variable(name, dim, field, role)
        self.variables[name] = v
        return Affine.variable(v)

    def var(self, name: str) -> Affine:
        return Affine.variable(self.variables[name])

    def add_block(self, label: str, expr) -> None:
        expr = Affine.lift(expr)
        if expr.shape[0] != expr.shape[1]:
            raise ShapeError(f"block {label!r} is not square: {expr.shape}")
        self._check_declared(expr, label)
        self.blocks.append(Block(label, expr))

    def add_equality(self, label: str, lhs, rhs=0.0) -> None:
        lhs = Affine.lift(lhs)
        expr = lhs - (Affine(np.full(lhs.shape, rhs)) if np.isscalar(rhs) else Affine.lift(rhs))
        self._check_declared(expr, label)
        self.equalities.append(Equality(label, expr))

    def _check_declared(self, expr: Affine, label: str) -> None:
        missing = expr.variables() - set(self.variables)
        if missing:
            raise KeyError(f"{label!r} references undeclared variables {sorted(missing)}")

    # inspection -------------------------------------------------------
    @property
    def inputs(self) -> List[str]:
        return [n for n, v in self.variables.items() if v.role == "input"]

    @property
    def auxiliaries(self) -> List[str]:
        return [n for n, v in self.variables.items() if v.role != "input"]

    def block_sizes(self) -> List[int]:
        return [b.size for b in self.blocks]

    def validate(self, seed: int = 0) -> None:
        """Check every block is Hermitian for Hermitian arguments (random probes)."""
        rng = np.random.default_rng(seed)
        for b in self.blocks:
            self._check_declared(b.expr, b.label)
            if not np.allclose(b.expr.const, b.expr.const.conj().T):
                raise ValueError(f"block {b.label!r}: constant part is not Hermitian")
            for name in sorted(b.expr.variables()):
                v = self.variables[name]
                G = rng.standard_normal((v.dim, v.dim))
                if v.field == COMPLEX:
                    G = G + 1j * rng.standard_normal((v.dim, v.dim))
                val = b.expr.linear_part(name, hermitian(G))
                if not np.allclose(val, val.conj().T, atol=1e-12):
                    raise ValueError(f"block {b.label!r}: term in {name!r} is not Hermitian")

    # evaluation -------------------------------------------------------
    def evaluate_blocks(self, assignment: Dict[str, np.ndarray]) -> List[np.ndarray]:
        return [hermitian(b.expr.evaluate(assignment)) for b in self.blocks]

    def equality_residual(self, assignment: Dict[str, np.ndarray]) -> float:
        res = 0.0
        for e in self.equalities:
            res = max(res, float(np.max(np.abs(e.expr.evaluate(assignment)))))
        return res

    def min_block_eigenvalue(self, assignment: Dict[str, np.ndarray]) -> float:
        vals = [lambda_min(B) for B in self.evaluate_blocks(assignment)]
        return min(vals) if vals else np.inf

    def is_satisfied(self, assignment: Dict[str, np.ndarray], tol: float = 1e-9,
                     eq_tol: float = 1e-9) -> bool:
        """All blocks PSD (relative tolerance ``tol``) and equalities within ``eq_tol``."""
        if self.equality_residual(assignment) > eq_tol:
            return False
        return all(is_psd(B, tol) for B in self.evaluate_blocks(assignment))
