"""Compile a LinearMatrixSystem into a standard-form BlockSDP.

Every unfixed Hermitian variable is expanded in a real basis (n(n+1)/2
coordinates for real symmetric, n^2 for complex Hermitian).  A block whose
data has an imaginary part is embedded as H = A + iB -> [[A, -B], [B, A]].
Linear equalities are eliminated: a rank-revealing Gaussian elimination
expresses pivot coordinates through the remaining ones, and the remaining
coordinates become the SDP variables.  All 1 x 1 blocks are merged into one
diagonal block.
"""

from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp

from ..errors import ShapeError
from ..lmi import LinearMatrixSystem
from .problem import BlockSDP, SdpBlock

ELIM_TOL = 1e-11


def _embed(H: np.ndarray) -> np.ndarray:
    A, B = np.real(H), np.imag(H)
    return np.block([[A, -B], [B, A]])


class _Coordinates:
    """Offsets of the free variables inside the full coordinate vector."""

    def __init__(self, system: LinearMatrixSystem, fixings: Dict[str, np.ndarray]):
        self.free = [v for n, v in system.variables.items() if n not in fixings]
        self.offset = {}
        pos = 0
        for v in self.free:
            self.offset[v.name] = pos
            pos += v.num_coords
        self.size = pos
        self.bases = {v.name: v.basis() for v in self.free}


def _constant_part(expr, fixings):
    C = np.array(expr.const, dtype=complex)
    for name, f in expr.terms:
        if name in fixings:
            C = C + f(fixings[name])
    return C


def _linear_rows(expr, coords: _Coordinates):
    """List of (coordinate index, matrix) for the free variables in expr."""
    rows = []
    for name in sorted(expr.variables()):
        if name not in coords.offset:
            continue
        base = coords.offset[name]
        for i, E in enumerate(coords.bases[name]):
            L = expr.linear_part(name, E)
            if np.any(L):
                rows.append((base + i, L))
    return rows


def _eliminate(E: np.ndarray, e: np.ndarray, ncoords: int):
    """Solve E z = e for some coordinates in terms of the others.

    Returns (z0, Q) with z = z0 + Q y parametrizing all solutions, where y
    are the non-pivot coordinates.  Pivots are chosen by largest magnitude
    in the current row (complete pivoting within the row).
    """
    E = E.astype(float).copy()
    e = e.astype(float).copy()
    scale = max(1.0, float(np.max(np.abs(E))) if E.size else 1.0)
    pivots = []
    rows = []
    r = 0
    for r in range(E.shape[0]):
        row = E[r]
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) <= ELIM_TOL * scale:
            if abs(e[r]) > 1e-9 * max(1.0, float(np.max(np.abs(e)))):
                raise ValueError("inconsistent linear equalities (check the fixings)")
            continue
        piv = row[j]
        E[r] /= piv
        e[r] /= piv
        col = E[:, j].copy()
        col[r] = 0.0
        nz = np.nonzero(col)[0]
        if nz.size:
            E[nz] -= np.outer(col[nz], E[r])
            e[nz] -= col[nz] * e[r]
        pivots.append(j)
        rows.append(r)
    pset = set(pivots)
    free = [j for j in range(ncoords) if j not in pset]
    z0 = np.zeros(ncoords)
    Q = sp.lil_matrix((ncoords, len(free)))
    fpos = {j: i for i, j in enumerate(free)}
    for j in free:
        Q[j, fpos[j]] = 1.0
    Efree = E[:, free] if free else np.zeros((E.shape[0], 0))
    for r, j in zip(rows, pivots):
        z0[j] = e[r]
        nz = np.nonzero(np.abs(Efree[r]) > 1e-15)[0]
        for i in nz:
            Q[j, i] = -Efree[r, i]
    return z0, Q.tocsr()


def compile_system(system: LinearMatrixSystem, objective: Optional[dict] = None,
                   fixings: Optional[dict] = None, sense: str = "min",
                   feasibility: bool = False, shift_bound: float = 1.0) -> BlockSDP:
    """Build the BlockSDP for ``system`` with some variables fixed.

    ``objective`` maps variable names to coefficients c (scalar or matrix);
    the objective is the sum of Re Tr(c V).  With ``feasibility`` set the
    objective is replaced by a shift s added as s I to every block, bounded
    below by -shift_bound: the system is feasible iff the optimal s <= 0.
    """
    raw = dict(fixings or {})
    fixings = {}
    for name, val in raw.items():
        if name not in system.variables:
            raise KeyError(f"fixing refers to undeclared variable {name!r}")
        dim = system.variables[name].dim
        val = np.asarray(val)
        if val.ndim == 0:
            val = np.full((1, 1), val)
        if val.size != dim * dim:
            raise ShapeError(f"fixing for {name!r} has shape {val.shape}, expected ({dim}, {dim})")
        fixings[name] = val.reshape(dim, dim)
    objective = dict(objective or {})
    for name in objective:
        if name not in system.variables:
            raise KeyError(f"objective refers to undeclared variable {name!r}")
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    sgn = 1.0 if sense == "min" else -1.0

    coords = _Coordinates(system, fixings)
    N = coords.size

    # objective over full coordinates
    cvec = np.zeros(N)
    offset = 0.0
    for name, coef in objective.items():
        v = system.variables[name]
        C = np.asarray(coef)
        C = C * np.eye(v.dim) if C.ndim == 0 else C
        if name in fixings:
            offset += sgn * float(np.real(np.trace(C @ fixings[name])))
            continue
        base = coords.offset[name]
        for i, E in enumerate(coords.bases[name]):
            cvec[base + i] = sgn * float(np.real(np.trace(C @ E)))

    # equalities
    eq_rows, eq_rhs = [], []
    for eq in system.equalities:
        C = _constant_part(eq.expr, fixings)
        lin = _linear_rows(eq.expr, coords)
        r, c = C.shape
        if r == c:
            iu = np.triu_indices(r)
            sel = lambda M: np.concatenate([np.real(M[iu]), np.imag(M[iu])])
        else:
            sel = lambda M: np.concatenate([np.real(M).ravel(), np.imag(M).ravel()])
        rhs = -sel(C)
        block = np.zeros((rhs.size, N))
        for idx, L in lin:
            block[:, idx] = sel(np.asarray(L, dtype=complex))
        keep = np.any(block != 0, axis=1) | (np.abs(rhs) > 0)
        eq_rows.append(block[keep])
        eq_rhs.append(rhs[keep])
    if eq_rows:
        Emat = np.vstack(eq_rows)
        evec = np.concatenate(eq_rhs)
    else:
        Emat = np.zeros((0, N))
        evec = np.zeros(0)
    z0, Q = _eliminate(Emat, evec, N)

    # blocks over full coordinates, then reduced through z = z0 + Q y
    blocks_full = []
    for blk in system.blocks:
        C = _constant_part(blk.expr, fixings)
        lin = _linear_rows(blk.expr, coords)
        is_complex = bool(np.any(np.imag(C))) or any(np.iscomplexobj(L) and np.any(np.imag(L)) for _, L in lin)
        conv = _embed if is_complex else np.real
        C = conv(C)
        s = C.shape[0]
        rows, cols, vals = [], [], []
        for idx, L in lin:
            M = conv(np.asarray(L, dtype=complex)).ravel()
            nz = np.nonzero(M)[0]
            rows.extend([idx] * nz.size)
            cols.extend(nz.tolist())
            vals.extend(M[nz].tolist())
        A = sp.csr_matrix((vals, (rows, cols)), shape=(N, s * s))
        blocks_full.append((blk.label, C, A))

    QT = Q.T.tocsr()
    p = Q.shape[1]
    b = QT @ cvec
    offset += float(cvec @ z0)
    reduced = []
    for label, C, A in blocks_full:
        Cz = C + (A.T @ z0).reshape(C.shape)
        Ar = (QT @ A).tocsr()
        Ar.eliminate_zeros()
        reduced.append((label, Cz, Ar))

    # drop variables that touch no block
    used = np.zeros(p, dtype=bool)
    for _, _, Ar in reduced:
        used[np.unique(Ar.tocoo().row)] = True
    unused_cost = np.abs(b[~used])
    if unused_cost.size and np.max(unused_cost) > 0:
        raise ValueError("objective is unbounded: a variable with nonzero cost touches no constraint")
    keep = np.nonzero(used)[0]
    Qk = Q[:, keep]
    b = b[keep]
    reduced = [(label, Cz, Ar[keep]) for label, Cz, Ar in reduced]
    p = keep.size

    shift_index = None
    if feasibility:
        shift_index = p
        p += 1
        b = np.zeros(p)
        b[shift_index] = 1.0
        offset = 0.0
        sgn = 1.0
        new = []
        for label, Cz, Ar in reduced:
            s = Cz.shape[0]
            extra = sp.csr_matrix(np.eye(s).reshape(1, s * s))
            new.append((label, Cz, sp.vstack([Ar, extra]).tocsr()))
        bound = sp.csr_matrix(([1.0], ([shift_index], [0])), shape=(p, 1))
        new.append(("shift bound", np.array([[shift_bound]]), bound))
        reduced = new

    # split: proper blocks and 1x1 blocks merged into a diagonal block
    sdp_blocks = []
    diag_C, diag_cols, diag_labels = [], [], []
    for label, Cz, Ar in reduced:
        if Cz.shape[0] == 1:
            diag_C.append(float(Cz[0, 0]))
            diag_cols.append(Ar)
            diag_labels.append(label)
            continue
        sdp_blocks.append(SdpBlock(Cz.shape[0], -0.5 * (Cz + Cz.T), Ar, False, label))
    if diag_C:
        L = len(diag_C)
        cols = []
        for d, Ar in enumerate(diag_cols):
            coo = Ar.tocoo()
            cols.append((coo.row, np.full(coo.row.size, d * L + d), coo.data))
        r = np.concatenate([c[0] for c in cols])
        c = np.concatenate([c[1] for c in cols])
        v = np.concatenate([c[2] for c in cols])
        A = sp.csr_matrix((v, (r, c)), shape=(p, L * L))
        sdp_blocks.append(SdpBlock(L, -np.diag(diag_C), A, True, "; ".join(diag_labels)))

    variables = dict(system.variables)
    free_names = [v.name for v in coords.free]

    def recover(y):
        y = np.asarray(y, dtype=float)
        yk = y[:Qk.shape[1]]
        z = z0 + Qk @ yk
        out = {name: np.array(val) for name, val in fixings.items()}
        for name in free_names:
            v = variables[name]
            base = coords.offset[name]
            out[name] = v.from_coords(z[base:base + v.num_coords])
        return out

    return BlockSDP(p, b, sdp_blocks, offset, sgn, recover, shift_index)
