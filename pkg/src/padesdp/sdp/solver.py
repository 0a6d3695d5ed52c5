"""Primal-dual interior-point method for BlockSDP problems.

Infeasible-start path following with Nesterov-Todd scaling and Mehrotra's
predictor-corrector.  With S = sum y_i F_i - F_0 and the dual matrix X, each
iteration computes the NT scaling G (G G^T = W, W S W = X,
G^{-1} X G^{-T} = G^T S G = Lambda) per block, forms the Schur complement
M_ij = sum_blocks <F_i, W F_j W>, and solves for the search direction.

Blocks of equal size are processed as one batch; each batch keeps, per block,
only the variables that touch it, padded to a common count with zero
matrices.  Dense linear algebra inside the iteration uses LAPACK through
numpy and scipy.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg as sla

from ..errors import NumericalError
from .problem import BlockSDP, SdpSolution


@dataclass
class SolverOptions:
    tol: float = 1e-8  # relative primal/dual infeasibility
    gap_tol: float = 1e-9  # relative duality gap
    max_iter: int = 200
    step_fraction: float = 0.98
    max_total_dim: int = 4000
    divergence: float = 1e12
    verbose: bool = False
    schur: str = "cholesky"  # or "qr"
    stall_iterations: int = 8
    min_step: float = 1e-8
    refinement_steps: int = 3
    equal_steps: bool = True
    neighborhood: float = 0.0


class _Group:
    """Blocks of one size with their touching variables."""

    def __init__(self, size, F0, idx, F, block_ids):
        self.size = size
        self.F0 = F0  # (nb, s, s)
        self.idx = idx  # (nb, q) variable indices, padded with 0
        self.F = F  # (nb, q, s, s), zero where padded
        self.block_ids = block_ids
        self.Fflat = F.reshape(F.shape[0], F.shape[1], -1)

    def apply(self, y):
        """sum_i y_i F_i for every block of the group."""
        nb, s = self.F.shape[0], self.size
        return (y[self.idx][:, None, :] @ self.Fflat).reshape(nb, s, s)

    def adjoint(self, X, out):
        """out_i += <F_i, X> over the blocks of the group."""
        vals = (self.Fflat @ X.reshape(X.shape[0], -1, 1))[:, :, 0]
        np.add.at(out, self.idx, vals)


def _groups(problem: BlockSDP) -> List[_Group]:
    by_size = {}
    for bid, blk in enumerate(problem.blocks):
        by_size.setdefault(blk.size, []).append(bid)
    groups = []
    for s, bids in sorted(by_size.items()):
        touch = [problem.blocks[b].touching() for b in bids]
        q = max(1, max(len(t) for t in touch))
        nb = len(bids)
        idx = np.zeros((nb, q), dtype=int)
        F = np.zeros((nb, q, s, s))
        F0 = np.zeros((nb, s, s))
        for r, (b, t) in enumerate(zip(bids, touch)):
            blk = problem.blocks[b]
            F0[r] = blk.F0
            if len(t):
                idx[r, :len(t)] = t
                F[r, :len(t)] = blk.A[t].toarray().reshape(len(t), s, s)
        groups.append(_Group(s, F0, idx, F, bids))
    return groups


def _sym(A):
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def _chol(A, what, group):
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise NumericalError(
            f"{what} lost positive definiteness in a block of size {group.size} "
            f"(blocks {group.block_ids[:5]}{'...' if len(group.block_ids) > 5 else ''})"
        )


def _max_step(Lam, dtilde):
    """Largest alpha with Lam + alpha * dtilde PSD (batched, Lam diagonal > 0)."""
    r = 1.0 / np.sqrt(Lam)
    Mm = _sym(r[:, :, None] * dtilde * r[:, None, :])
    lmin = np.linalg.eigvalsh(Mm)[:, 0]
    m = float(np.min(lmin))
    return np.inf if m >= 0 else -1.0 / m


def _schur_cholesky(groups, Ws, p):
    M = np.zeros((p, p))
    for g, W in zip(groups, Ws):
        WFW = W[:, None] @ g.F @ W[:, None]
        loc = g.Fflat @ np.swapaxes(WFW.reshape(WFW.shape[0], WFW.shape[1], -1), -1, -2)
        np.add.at(M, (g.idx[:, :, None], g.idx[:, None, :]), loc)
    M = 0.5 * (M + M.T)
    # a tiny diagonal shift when M is numerically indefinite; the caller's
    # iterative refinement against the exact operator removes its effect
    scale = max(1.0, float(np.max(np.abs(np.diag(M)))))
    shift = 0.0
    for _ in range(12):
        try:
            cf = sla.cho_factor(M + shift * np.eye(p), lower=True, check_finite=False)
            return lambda r: sla.cho_solve(cf, r, check_finite=False)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            shift = 1e-15 * scale if shift == 0.0 else 10.0 * shift
    raise NumericalError("Schur complement is not positive definite")


def _schur_qr(groups, Gs, p):
    """Factor M = B^T B through a QR of B, B_i = svec(G^T F_i G)."""
    rows = []
    for g, G in zip(groups, Gs):
        s = g.size
        iu, ju = np.triu_indices(s)
        wt = np.where(iu == ju, 1.0, np.sqrt(2.0))
        GFG = np.swapaxes(G, -1, -2)[:, None] @ g.F @ G[:, None]
        vals = GFG[:, :, iu, ju] * wt  # (nb, q, s(s+1)/2)
        nb, q, L = vals.shape
        Bg = np.zeros((nb, L, p))
        bidx = np.repeat(np.arange(nb), q)
        np.add.at(Bg, (bidx, slice(None), g.idx.ravel()), vals.reshape(nb * q, L))
        rows.append(Bg.reshape(nb * L, p))
    B = np.vstack(rows)
    R = np.linalg.qr(B, mode="r")
    d = np.abs(np.diag(R))
    floor = 1e-15 * max(1.0, float(np.max(d)))
    R[np.diag_indices(p)] = np.where(d < floor, floor, np.diag(R))

    def solve_(r):
        z = sla.solve_triangular(R, r, trans="T", check_finite=False)
        return sla.solve_triangular(R, z, check_finite=False)
    return solve_


def _initial_point(groups, b, p):
    """Scaled identities per block (the usual xi I, eta I heuristic)."""
    Fnorm = np.zeros(p)
    for g in groups:
        np.add.at(Fnorm, g.idx, np.sum(g.Fflat**2, axis=2))
    Fnorm = np.sqrt(Fnorm)
    ratio = float(np.max((1.0 + np.abs(b)) / (1.0 + Fnorm))) if p else 1.0
    normF = float(np.max(Fnorm)) if p else 0.0
    X, S = [], []
    for g in groups:
        s = g.size
        nb = g.F0.shape[0]
        f0 = np.sqrt(np.sum(g.F0**2, axis=(1, 2)))
        xi = max(10.0, np.sqrt(s), s * ratio)
        eta = np.maximum(10.0, np.maximum(np.sqrt(s), np.maximum(f0, normF)))
        eye = np.broadcast_to(np.eye(s), (nb, s, s))
        X.append(xi * eye)
        S.append(eta[:, None, None] * eye)
    return X, S


def _nt_scaling(g, Xg, Sg):
    """G with G G^T = W, W S W = X and G^{-1} X G^{-T} = G^T S G = diag(lam)."""
    Lx = _chol(Xg, "X", g)
    Ls = _chol(Sg, "S", g)
    U, lam, _ = np.linalg.svd(np.swapaxes(Lx, -1, -2) @ Ls)
    G = Lx @ U * (1.0 / np.sqrt(lam))[:, None, :]
    Gi = (np.sqrt(lam)[:, :, None] * np.swapaxes(U, -1, -2)) @ np.linalg.inv(Lx)
    return G, Gi, lam


def solve(problem: BlockSDP, options: SolverOptions | None = None, **kwargs) -> SdpSolution:
    """Solve ``problem``; keyword arguments override fields of ``options``.

    Status is "optimal" when the relative residuals and gap meet the
    tolerances, "infeasible-certificate" when an iterate diverges (an
    improving ray of the primal or dual), "stalled" when the iteration can
    make no further progress (loss of definiteness near a degenerate
    optimum, or tiny steps) and "max-iterations" otherwise.  Unless optimal,
    the returned point is the iterate with the smallest residual measure.
    """
    opts = SolverOptions(**{**(options or SolverOptions()).__dict__, **kwargs})
    if problem.total_dim > opts.max_total_dim:
        raise ValueError(f"total block dimension {problem.total_dim} exceeds the cap {opts.max_total_dim}")
    p = problem.num_vars
    b = problem.b
    groups = _groups(problem)
    ntot = problem.total_dim

    if not groups:
        y = np.zeros(p)
        val = problem.value(y)
        return SdpSolution(y, val, val, [], [], 0.0, 0.0, 0.0, "optimal", 0)

    X, S = _initial_point(groups, b, p)
    y = np.zeros(p)
    bnorm = 1.0 + float(np.linalg.norm(b))
    F0norm = 1.0 + float(np.sqrt(sum(np.sum(g.F0**2) for g in groups)))

    def A_of(Ms):
        out = np.zeros(p)
        for g, M in zip(groups, Ms):
            g.adjoint(M, out)
        return out

    status = "max-iterations"
    best = None
    infeas0 = mu0 = None
    since_best = 0
    ap = ad = 0.0
    it = 0
    for it in range(opts.max_iter + 1):
        Rd = [g.apply(y) - g.F0 - Sg for g, Sg in zip(groups, S)]
        rp = b - A_of(X)
        pobj = float(b @ y)
        dobj = float(sum(np.sum(g.F0 * Xg) for g, Xg in zip(groups, X)))
        xs = float(sum(np.sum(Xg * Sg) for Xg, Sg in zip(X, S)))
        mu = xs / ntot
        dinf = float(np.linalg.norm(rp)) / bnorm
        pinf = float(np.sqrt(sum(np.sum(R**2) for R in Rd))) / F0norm
        gap = abs(pobj - dobj)
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))
        if opts.verbose:
            print(f"{it:3d} p={pobj:+.10e} d={dobj:+.10e} pinf={pinf:.2e} dinf={dinf:.2e} "
                  f"mu={mu:.2e} ap={ap:.2e} ad={ad:.2e}")
        merit = max(pinf / opts.tol, dinf / opts.tol, relgap / opts.gap_tol)
        if best is None or merit < best[0]:
            best = (merit, [Xg.copy() for Xg in X], y.copy(), [Sg.copy() for Sg in S], pinf, dinf, gap)
            since_best = 0
        else:
            since_best += 1
        if merit <= 1.0:
            status = "optimal"
            break
        if it == opts.max_iter:
            break
        xnorm = max(float(np.max(np.abs(Xg))) for Xg in X)
        if xnorm > opts.divergence or float(np.max(np.abs(y), initial=0.0)) > opts.divergence:
            status = "infeasible-certificate"
            break
        if since_best >= opts.stall_iterations or (it > 0 and max(ap, ad) < opts.min_step):
            status = "stalled"
            break

        try:
            scal = [_nt_scaling(g, Xg, Sg) for g, Xg, Sg in zip(groups, X, S)]
        except NumericalError:
            if it == 0:
                raise
            status = "stalled"
            break
        Gs = [sc[0] for sc in scal]
        Ginv = [sc[1] for sc in scal]
        Lams = [sc[2] for sc in scal]
        GT = [np.swapaxes(G, -1, -2) for G in Gs]
        Ws = [_sym(G @ Gt) for G, Gt in zip(Gs, GT)]

        # Schur complement system M dy = r with M_ij = <F_i, W F_j W>
        solveM = _schur_qr(groups, Gs, p) if opts.schur == "qr" else _schur_cholesky(groups, Ws, p)
        Rd_t = [_sym(Gt @ R @ G) for Gt, R, G in zip(GT, Rd, Gs)]

        def schur_apply(v):
            return A_of([W @ g.apply(v) @ W for g, W in zip(groups, Ws)])

        def direction(Ht):
            """Directions for the scaled complementarity target Ht (per block).

            In scaled coordinates dX~ = Ht - G^T dS G, and dX = G dX~ G^T.
            """
            rhs = A_of([G @ (H - R) @ Gt for G, H, R, Gt in zip(Gs, Ht, Rd_t, GT)]) - rp
            dy = solveM(rhs)
            for _ in range(opts.refinement_steps):
                dy = dy + solveM(rhs - schur_apply(dy))
            dS = [g.apply(dy) + R for g, R in zip(groups, Rd)]
            dSt = [_sym(Gt @ dSg @ G) for Gt, dSg, G in zip(GT, dS, Gs)]
            dXt = [_sym(H - st) for H, st in zip(Ht, dSt)]
            return dy, dXt, dSt

        def steps(dXt, dSt):
            ap_ = min(_max_step(lam, xt) for lam, xt in zip(Lams, dXt))
            ad_ = min(_max_step(lam, st) for lam, st in zip(Lams, dSt))
            return ap_, ad_

        def diag(lam):
            return lam[:, :, None] * np.eye(lam.shape[1])[None]

        # predictor: target X S = 0, i.e. Ht = -Lambda
        dy, dXt, dSt = direction([-diag(lam) for lam in Lams])
        ap_aff, ad_aff = steps(dXt, dSt)
        ap_aff, ad_aff = min(1.0, ap_aff), min(1.0, ad_aff)
        xs_aff = float(sum(np.sum((diag(lam) + ap_aff * xt) * (diag(lam) + ad_aff * st))
                           for lam, xt, st in zip(Lams, dXt, dSt)))
        sigma = min(1.0, max(0.0, xs_aff / xs)) ** 3 if xs > 0 else 0.0
        # keep complementarity from racing ahead of feasibility
        if opts.neighborhood > 0 and mu > 0:
            if infeas0 is None:
                infeas0, mu0 = max(pinf, dinf, 1e-300), mu
            floor = opts.neighborhood * mu0 * max(pinf, dinf) / infeas0
            sigma = max(sigma, min(1.0, floor / mu))

        # corrector: Lambda dS~ + dX~ Lambda (symmetrized) = sigma mu I - Lambda^2 - dX~_aff dS~_aff
        Ht = []
        for lam, xt, st in zip(Lams, dXt, dSt):
            s_ = lam.shape[1]
            C = sigma * mu * np.eye(s_)[None] - diag(lam**2) - _sym(xt @ st)
            Ht.append(2.0 * C / (lam[:, :, None] + lam[:, None, :]))
        dy, dXt, dSt = direction(Ht)
        ap, ad = steps(dXt, dSt)
        ap = min(1.0, opts.step_fraction * ap)
        ad = min(1.0, opts.step_fraction * ad)
        if opts.equal_steps:
            ap = ad = min(ap, ad)
        X = [_sym(G @ (diag(lam) + ap * xt) @ Gt) for G, lam, xt, Gt in zip(Gs, Lams, dXt, GT)]
        S = [_sym(np.swapaxes(Gi, -1, -2) @ (diag(lam) + ad * st) @ Gi)
             for Gi, lam, st in zip(Ginv, Lams, dSt)]
        y = y + ad * dy

    if status != "optimal" and status != "infeasible-certificate":
        _, X, y, S, pinf, dinf, gap = best

    Xb = [None] * len(problem.blocks)
    Sb = [None] * len(problem.blocks)
    for g, Xg, Sg in zip(groups, X, S):
        for r, bid in enumerate(g.block_ids):
            Xb[bid] = Xg[r]
            Sb[bid] = Sg[r]
    pobj = problem.value(y)
    dobj = problem.sign * (float(sum(np.sum(g.F0 * Xg) for g, Xg in zip(groups, X))) + problem.offset)
    return SdpSolution(y, pobj, dobj, Xb, Sb, pinf, dinf, gap, status, it)
