"""Two-phase dense tableau simplex.

The problem is ``min c.x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and
per-variable bounds.  Bounds are folded into a standard form with nonnegative
and free columns; finite upper bounds become extra ``<=`` rows.
"""
from dataclasses import dataclass

import numpy as np

from .. import kernels
from .report import INFEASIBLE, MAX_ITER, OPTIMAL, UNBOUNDED, SolveReport


def _dense(M, ncols):
    if M is None:
        return np.zeros((0, ncols))
    if hasattr(M, "toarray"):
        M = M.toarray()
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    return M


@dataclass
class LinearProgram:
    c: np.ndarray
    A_eq: object = None
    b_eq: np.ndarray = None
    A_ub: object = None
    b_ub: np.ndarray = None
    lb: np.ndarray = None
    ub: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_eq = _dense(self.A_eq, n)
        self.A_ub = _dense(self.A_ub, n)
        self.b_eq = np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, float).ravel()
        self.b_ub = np.zeros(0) if self.b_ub is None else np.asarray(self.b_ub, float).ravel()
        self.lb = np.zeros(n) if self.lb is None else np.broadcast_to(
            np.asarray(self.lb, float), (n,)).copy()
        self.ub = np.full(n, np.inf) if self.ub is None else np.broadcast_to(
            np.asarray(self.ub, float), (n,)).copy()
        if self.A_eq.shape != (self.b_eq.size, n) or self.A_ub.shape != (self.b_ub.size, n):
            raise ValueError("constraint matrix and right-hand side shapes disagree")
        for arr in (self.c, self.A_eq, self.A_ub, self.b_eq, self.b_ub):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)) or np.any(self.lb > self.ub) \
                or np.any(self.lb == np.inf) or np.any(self.ub == -np.inf):
            raise ValueError("invalid variable bounds")

    @property
    def n(self):
        return self.c.size

    def objective(self, x):
        return float(self.c @ x)


def _standard_form(lp):
    """Return (A, b, c, free, kind, recover) for ``min c.x', A x' (=) b``.

    ``kind`` per row: 0 equality, 1 original ``<=`` row, 2 upper-bound row.
    ``recover(xs)`` maps a standard-form point back to the original variables.
    """
    n = lp.n
    lb, ub = lp.lb, lp.ub
    sign = np.ones(n)
    shift = np.zeros(n)
    free = np.zeros(n, dtype=bool)
    ub_rows = []
    for j in range(n):
        if np.isfinite(lb[j]):
            shift[j] = lb[j]
            if np.isfinite(ub[j]):
                ub_rows.append((j, ub[j] - lb[j]))
        elif np.isfinite(ub[j]):
            sign[j] = -1.0
            shift[j] = ub[j]
        else:
            free[j] = True
    # x = shift + sign * x'
    Aeq = lp.A_eq * sign
    beq = lp.b_eq - lp.A_eq @ shift
    Aub = lp.A_ub * sign
    bub = lp.b_ub - lp.A_ub @ shift
    if ub_rows:
        Ab = np.zeros((len(ub_rows), n))
        for i, (j, v) in enumerate(ub_rows):
            Ab[i, j] = 1.0
        bb = np.array([v for _, v in ub_rows])
        Aub = np.vstack([Aub, Ab])
        bub = np.concatenate([bub, bb])
    kind = np.concatenate([np.zeros(beq.size, int), np.ones(lp.b_ub.size, int),
                           np.full(len(ub_rows), 2, int)])
    c = lp.c * sign
    const = float(lp.c @ shift)

    def recover(xs):
        return shift + sign * xs[:n]

    return Aeq, beq, Aub, bub, c, free, kind, const, recover, sign


def solve_lp(lp, max_iter=None, tol=1e-9):
    """Solve ``lp`` and return a :class:`SolveReport`.

    ``y`` holds the duals of the equality rows followed by those of the
    ``<=`` rows (nonpositive at optimality), in the convention
    ``c - A_eq^T y_eq - A_ub^T y_ub >= 0`` on bounded-below columns.
    """
    Aeq, beq, Aub, bub, c, free, kind, const, recover, vsign = _standard_form(lp)
    n = lp.n
    meq, mub = beq.size, bub.size
    m = meq + mub
    # columns: structural n, slacks mub, artificials (allocated per row)
    A = np.zeros((m, n + mub))
    A[:meq, :n] = Aeq
    A[meq:, :n] = Aub
    A[meq:, n:] = np.eye(mub)
    b = np.concatenate([beq, bub])
    rsign = np.where(b < 0, -1.0, 1.0)
    A *= rsign[:, None]
    b = b * rsign
    cfull = np.concatenate([c, np.zeros(mub)])
    freefull = np.concatenate([free, np.zeros(mub, dtype=bool)])
    ncore = n + mub

    basis = np.empty(m, dtype=np.int64)
    need_art = []
    for i in range(m):
        if i >= meq and rsign[i] > 0:
            basis[i] = n + (i - meq)
        else:
            need_art.append(i)
    nart = len(need_art)
    ncol = ncore + nart
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :ncore] = A
    T[:m, ncol] = b
    for k, i in enumerate(need_art):
        T[i, ncore + k] = 1.0
        basis[i] = ncore + k
    free_t = np.concatenate([freefull, np.zeros(nart, dtype=bool)])
    flipped = np.zeros(ncol, dtype=bool)
    allowed = np.ones(ncol, dtype=bool)
    if max_iter is None:
        max_iter = 50 * (m + ncol) + 1000
    scale_b = 1.0 + np.abs(b).max(initial=0.0)
    iters = 0

    if nart:
        art_rows = np.array(need_art)
        T[m, :] = -T[art_rows].sum(axis=0)
        T[m, ncore:ncol] = 0.0
        st, it = kernels.simplex_iterate(T, basis, free_t, allowed, flipped, max_iter,
                                         tol_cost=tol, tol_piv=tol)
        iters += it
        if st == kernels.MAX_ITER:
            return SolveReport(MAX_ITER, iterations=iters)
        if -T[m, ncol] > 1e-7 * scale_b:
            return SolveReport(INFEASIBLE, iterations=iters,
                               info={"phase1_objective": -T[m, ncol]})
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] < ncore:
                continue
            row = np.abs(T[i, :ncore])
            row[np.isin(np.arange(ncore), basis)] = 0.0
            j = int(np.argmax(row))
            if row[j] > 1e-9:
                T[i] /= T[i, j]
                f = T[:, j].copy()
                f[i] = 0.0
                T -= np.outer(f, T[i])
                basis[i] = j
            else:
                keep[i] = False
        T = np.vstack([T[:m][keep], T[m:]])
        basis = basis[keep]
        T = np.delete(T, np.s_[ncore:ncol], axis=1)
        kept_rows = np.flatnonzero(keep)
    else:
        kept_rows = np.arange(m)
    flipped = flipped[:ncore].copy()
    free_t = free_t[:ncore]
    allowed = np.ones(ncore, dtype=bool)
    mk = kept_rows.size
    Ak = A[kept_rows]
    bk = b[kept_rows]

    status = None
    for attempt in range(4):
        csgn = np.where(flipped, -cfull, cfull)
        T[mk, :ncore] = csgn - csgn[basis] @ T[:mk, :ncore]
        T[mk, ncore] = -csgn[basis] @ T[:mk, ncore]
        st, it = kernels.simplex_iterate(T, basis, free_t, allowed, flipped, max_iter,
                                         tol_cost=tol, tol_piv=tol)
        iters += it
        if st == kernels.UNBOUNDED:
            return SolveReport(UNBOUNDED, iterations=iters)
        if st == kernels.MAX_ITER:
            status = MAX_ITER
            break
        # reinvert from the original data
        fs = np.where(flipped, -1.0, 1.0)
        Af = Ak * fs
        cf = cfull * fs
        B = Af[:, basis]
        try:
            xb = np.linalg.solve(B, bk)
            yk = np.linalg.solve(B.T, cf[basis])
        except np.linalg.LinAlgError:
            status = MAX_ITER
            break
        dred = cf - Af.T @ yk
        nb = np.ones(ncore, dtype=bool)
        nb[basis] = False
        bad_p = np.any(xb[~free_t[basis]] < -1e-7 * scale_b)
        scale_c = 1.0 + np.abs(cfull).max(initial=0.0)
        bad_d = np.any(dred[nb & ~free_t] < -1e-7 * scale_c) or \
            np.any(np.abs(dred[nb & free_t]) > 1e-7 * scale_c)
        if not (bad_p or bad_d):
            status = OPTIMAL
            break
        # rebuild the tableau from the basis and keep pivoting
        Binv = np.linalg.inv(B)
        T[:mk, :ncore] = Binv @ Af
        T[:mk, ncore] = xb
        T[:mk, ncore] = np.where(free_t[basis], xb, np.maximum(xb, 0.0))
    if status != OPTIMAL:
        return SolveReport(MAX_ITER, iterations=iters)

    xs = np.zeros(ncore)
    xs[basis] = xb
    xs = np.where(flipped, -xs, xs)
    xs[~free_t] = np.maximum(xs[~free_t], 0.0)
    x = recover(xs)
    yfull = np.zeros(m)
    yfull[kept_rows] = yk
    yfull *= rsign
    y_eq = yfull[:meq]
    y_ub = yfull[meq:meq + lp.b_ub.size]
    y_bnd = yfull[meq + lp.b_ub.size:]
    y = np.concatenate([y_eq, y_ub])
    value = lp.objective(x)
    # dual objective with bound terms folded in
    z = lp.c - lp.A_eq.T @ y_eq - lp.A_ub.T @ y_ub
    dual_value = float(lp.b_eq @ y_eq + lp.b_ub @ y_ub)
    fin_l = np.isfinite(lp.lb)
    fin_u = np.isfinite(lp.ub)
    zl = np.where(fin_l, np.maximum(z, 0.0), 0.0)
    zu = np.where(fin_u, np.minimum(z, 0.0), 0.0)
    dual_value += float(np.sum(np.where(fin_l, lp.lb, 0.0) * zl)
                        + np.sum(np.where(fin_u, lp.ub, 0.0) * zu))
    pres = 0.0
    if meq:
        pres = max(pres, float(np.abs(lp.A_eq @ x - lp.b_eq).max()))
    if lp.b_ub.size:
        pres = max(pres, float(np.maximum(lp.A_ub @ x - lp.b_ub, 0.0).max()))
    dres = float(np.abs(z - zl - zu).max(initial=0.0))
    return SolveReport(OPTIMAL, value=value, x=x, y=y, z=z, dual_value=dual_value,
                       primal_residual=pres, dual_residual=dres,
                       gap=abs(value - dual_value), iterations=iters,
                       info={"bound_duals": y_bnd})
