"""Hot inner loops, each in a numba flavour and a vectorised numpy flavour.

Public entry points (``margin_grid``, ``simplex_iterate``) dispatch on
``ellipt._accel.USE_NUMBA``.  Both flavours are importable under explicit
names so the benchmark and the tests can compare them directly.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# simplex status codes shared by both flavours
OPTIMAL = 0
UNBOUNDED = 1
MAX_ITER = 2


# --------------------------------------------------------------------------
# support-function grids
# --------------------------------------------------------------------------

@njit
def _margin_grid_nb(X, a0, b0, A, B):
    m, d = X.shape
    n = A.shape[0]
    out = np.empty(m)
    for i in range(m):
        p = 0.0
        q = 0.0
        for t in range(d):
            p += X[i, t] * a0[t]
            q += X[i, t] * b0[t]
        best = 0.0
        for k in range(n):
            u = 0.0
            v = 0.0
            for t in range(d):
                u += X[i, t] * A[k, t]
                v += X[i, t] * B[k, t]
            s = u * u + v * v
            if s > best:
                best = s
        out[i] = p * p + q * q - best
    return out


def _margin_grid_np(X, a0, b0, A, B, chunk=8192):
    m = X.shape[0]
    out = np.empty(m)
    for lo in range(0, m, chunk):
        Xc = X[lo:lo + chunk]
        s0 = (Xc @ a0) ** 2 + (Xc @ b0) ** 2
        sk = (Xc @ A.T) ** 2 + (Xc @ B.T) ** 2
        out[lo:lo + chunk] = s0 - sk.max(axis=1, initial=0.0)
    return out


def margin_grid(X, a0, b0, A, B):
    """Separation margins ``h_E0(x)^2 - max_k h_Ek(x)^2`` for each row ``x`` of ``X``."""
    X = np.ascontiguousarray(X, dtype=float)
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    a0 = np.ascontiguousarray(a0, dtype=float)
    b0 = np.ascontiguousarray(b0, dtype=float)
    if USE_NUMBA:
        return _margin_grid_nb(X, a0, b0, A, B)
    return _margin_grid_np(X, a0, b0, A, B)


# --------------------------------------------------------------------------
# dense tableau simplex
# --------------------------------------------------------------------------
#
# Tableau layout: rows 0..m-1 hold B^-1 [A | b]; row m holds the reduced
# costs and minus the objective value.  ``free`` marks columns without a
# sign constraint; such columns may enter in either direction (the column is
# negated and ``flipped`` toggled) and never leave the basis.

@njit
def _simplex_iterate_nb(T, basis, free, allowed, flipped, max_iter, bland_after,
                        tol_cost, tol_piv):
    m = T.shape[0] - 1
    ncol = T.shape[1] - 1
    is_basic = np.zeros(ncol, dtype=np.bool_)
    for i in range(m):
        is_basic[basis[i]] = True
    stall = 0
    bland = False
    it = 0
    while it < max_iter:
        # pricing
        enter = -1
        best = tol_cost
        for j in range(ncol):
            if is_basic[j] or not allowed[j]:
                continue
            dj = T[m, j]
            score = -dj
            if free[j] and dj > 0.0:
                score = dj
            if score > tol_cost:
                if bland:
                    enter = j
                    break
                if score > best:
                    best = score
                    enter = j
        if enter < 0:
            return OPTIMAL, it
        if free[enter] and T[m, enter] > 0.0:
            for i in range(m + 1):
                T[i, enter] = -T[i, enter]
            flipped[enter] = not flipped[enter]
        # ratio test
        leave = -1
        ratio = np.inf
        for i in range(m):
            a = T[i, enter]
            if a <= tol_piv or free[basis[i]]:
                continue
            r = T[i, ncol] / a
            if r < 0.0:
                r = 0.0
            if leave < 0 or r < ratio - 1e-12:
                leave = i
                ratio = r
            elif r <= ratio + 1e-12:
                if bland:
                    if basis[i] < basis[leave]:
                        leave = i
                        ratio = min(r, ratio)
                elif a > T[leave, enter]:
                    leave = i
                    ratio = min(r, ratio)
        if leave < 0:
            return UNBOUNDED, it
        # pivot
        piv = T[leave, enter]
        for k in range(ncol + 1):
            T[leave, k] /= piv
        for i in range(m + 1):
            if i == leave:
                continue
            f = T[i, enter]
            if f != 0.0:
                for k in range(ncol + 1):
                    T[i, k] -= f * T[leave, k]
        T[leave, enter] = 1.0
        is_basic[basis[leave]] = False
        is_basic[enter] = True
        basis[leave] = enter
        it += 1
        if ratio <= 1e-12:
            stall += 1
            if stall >= bland_after:
                bland = True
        else:
            stall = 0
            bland = False
    return MAX_ITER, it


def _simplex_iterate_np(T, basis, free, allowed, flipped, max_iter, bland_after,
                        tol_cost, tol_piv):
    m = T.shape[0] - 1
    ncol = T.shape[1] - 1
    is_basic = np.zeros(ncol, dtype=bool)
    is_basic[basis] = True
    stall = 0
    bland = False
    it = 0
    while it < max_iter:
        d = T[m, :ncol]
        score = np.where(free & (d > 0.0), d, -d)
        score[is_basic | ~allowed] = -np.inf
        cand = np.flatnonzero(score > tol_cost)
        if cand.size == 0:
            return OPTIMAL, it
        enter = int(cand[0]) if bland else int(cand[np.argmax(score[cand])])
        if free[enter] and T[m, enter] > 0.0:
            T[:, enter] *= -1.0
            flipped[enter] = not flipped[enter]
        col = T[:m, enter]
        ok = (col > tol_piv) & ~free[basis]
        rows = np.flatnonzero(ok)
        if rows.size == 0:
            return UNBOUNDED, it
        r = np.maximum(T[rows, ncol] / col[rows], 0.0)
        ratio = r.min()
        ties = rows[r <= ratio + 1e-12]
        if bland:
            leave = int(ties[np.argmin(basis[ties])])
        else:
            leave = int(ties[np.argmax(col[ties])])
        T[leave] /= T[leave, enter]
        f = T[:, enter].copy()
        f[leave] = 0.0
        T -= np.outer(f, T[leave])
        T[leave, enter] = 1.0
        is_basic[basis[leave]] = False
        is_basic[enter] = True
        basis[leave] = enter
        it += 1
        if ratio <= 1e-12:
            stall += 1
            if stall >= bland_after:
                bland = True
        else:
            stall = 0
            bland = False
    return MAX_ITER, it


def simplex_iterate(T, basis, free, allowed, flipped, max_iter, bland_after=50,
                    tol_cost=1e-9, tol_piv=1e-9):
    """Run primal simplex pivots on tableau ``T`` in place.

    Returns ``(status, iterations)`` with status one of ``OPTIMAL``,
    ``UNBOUNDED`` or ``MAX_ITER``.  Dantzig pricing is used until
    ``bland_after`` consecutive degenerate pivots, then Bland's rule until the
    objective moves again.
    """
    fn = _simplex_iterate_nb if USE_NUMBA else _simplex_iterate_np
    status, it = fn(T, basis, free, allowed, flipped, int(max_iter), int(bland_after),
                    float(tol_cost), float(tol_piv))
    return int(status), int(it)
