"""Primal-dual interior-point method for linear programs over products of
free, nonnegative and second-order (Lorentz) cones.

Primal:  min c.x   s.t.  A x = b,  x in K
Dual:    max b.y   s.t.  A^T y + z = c,  z in K*  (z = 0 on free blocks)

Mehrotra predictor-corrector with Nesterov-Todd scaling.  The Newton systems
are reduced to dense normal equations ``A_c W^2 A_c^T`` bordered by the free
columns.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .report import INFEASIBLE, MAX_ITER, OPTIMAL, UNBOUNDED, SolveReport

FREE, NONNEG, SOC = "free", "nonneg", "soc"


@dataclass
class ConeProgram:
    c: np.ndarray
    A: object
    b: np.ndarray
    cones: list

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        A = self.A.toarray() if hasattr(self.A, "toarray") else self.A
        self.A = np.asarray(A, dtype=float).reshape(-1, self.c.size)
        self.b = np.asarray(self.b, dtype=float).ravel()
        cones = []
        for kind, size in self.cones:
            size = int(size)
            if kind not in (FREE, NONNEG, SOC):
                raise ValueError(f"unknown cone kind {kind!r}")
            if kind == SOC and size < 2:
                raise ValueError("second-order cone blocks need size >= 2")
            if size < 0:
                raise ValueError("negative cone size")
            cones.append((kind, size))
        self.cones = cones
        if sum(s for _, s in cones) != self.c.size:
            raise ValueError("cone sizes do not partition the variable vector")
        if self.A.shape[0] != self.b.size:
            raise ValueError("A and b disagree in row count")
        for arr in (self.c, self.A, self.b):
            if not np.all(np.isfinite(arr)):
                raise ValueError("cone program data must be finite")

    @property
    def n(self):
        return self.c.size


class _Layout:
    """Index bookkeeping; SOC blocks are grouped by size for vectorised work."""

    def __init__(self, cones):
        free, lin = [], []
        groups = {}
        pos = 0
        for kind, size in cones:
            idx = np.arange(pos, pos + size)
            if kind == FREE:
                free.append(idx)
            elif kind == NONNEG:
                lin.append(idx)
            else:
                groups.setdefault(size, []).append(idx)
            pos += size
        self.n = pos
        self.free = np.concatenate(free) if free else np.zeros(0, int)
        self.lin = np.concatenate(lin) if lin else np.zeros(0, int)
        self.soc = [np.array(g) for _, g in sorted(groups.items())]
        self.cidx = np.concatenate([self.lin] + [g.ravel() for g in self.soc])
        # positions of each block inside the conic sub-vector
        self.nl = self.lin.size
        off = self.nl
        self.soc_loc = []
        for g in self.soc:
            k, m = g.shape
            self.soc_loc.append(off + np.arange(k * m).reshape(k, m))
            off += k * m
        self.nc = off
        self.degree = self.nl + sum(g.shape[0] for g in self.soc)

    def identity(self):
        e = np.zeros(self.nc)
        e[:self.nl] = 1.0
        for loc in self.soc_loc:
            e[loc[:, 0]] = 1.0
        return e


# ---- Jordan algebra helpers on the conic sub-vector ------------------------

def _jprod(L, u, v):
    out = np.empty(L.nc)
    out[:L.nl] = u[:L.nl] * v[:L.nl]
    for loc in L.soc_loc:
        U, V = u[loc], v[loc]
        out[loc[:, 0]] = np.einsum("ij,ij->i", U, V)
        out[loc[:, 1:]] = U[:, :1] * V[:, 1:] + V[:, :1] * U[:, 1:]
    return out


def _jdiv(L, lam, r):
    """Solve ``lam o u = r`` for u."""
    out = np.empty(L.nc)
    out[:L.nl] = r[:L.nl] / lam[:L.nl]
    for loc in L.soc_loc:
        Lm, R = lam[loc], r[loc]
        l0, l1 = Lm[:, 0], Lm[:, 1:]
        t = np.linalg.norm(l1, axis=1)
        det = (l0 - t) * (l0 + t)
        u0 = (l0 * R[:, 0] - np.einsum("ij,ij->i", l1, R[:, 1:])) / det
        out[loc[:, 0]] = u0
        out[loc[:, 1:]] = (R[:, 1:] - u0[:, None] * l1) / l0[:, None]
    return out


def _max_step(L, lam, v):
    """Largest alpha with ``lam + alpha v`` in the cone (inf when unbounded)."""
    best = np.inf
    if L.nl:
        vl = v[:L.nl]
        neg = vl < 0
        if np.any(neg):
            best = min(best, float(np.min(-lam[:L.nl][neg] / vl[neg])))
    for loc in L.soc_loc:
        Lm, V = lam[loc], v[loc]
        q0 = Lm[:, 0] ** 2 - np.einsum("ij,ij->i", Lm[:, 1:], Lm[:, 1:])
        q1 = Lm[:, 0] * V[:, 0] - np.einsum("ij,ij->i", Lm[:, 1:], V[:, 1:])
        q2 = V[:, 0] ** 2 - np.einsum("ij,ij->i", V[:, 1:], V[:, 1:])
        disc = q1 * q1 - q0 * q2
        with np.errstate(invalid="ignore", divide="ignore"):
            den = -q1 + np.sqrt(np.maximum(disc, 0.0))
            a = np.where((disc >= 0) & (den > 0), q0 / den, np.inf)
        best = min(best, float(np.min(a)))
    return best


def _shift_into_cone(L, u):
    """Return ``u + (1 + alpha) e`` when u is not strictly interior."""
    alpha = -np.inf
    if L.nl:
        alpha = max(alpha, float(np.max(-u[:L.nl])))
    for loc in L.soc_loc:
        U = u[loc]
        alpha = max(alpha, float(np.max(np.linalg.norm(U[:, 1:], axis=1) - U[:, 0])))
    if alpha < 0:
        return u.copy()
    return u + (1.0 + alpha) * L.identity()


def _lorentz_norm(U):
    """``sqrt(u0^2 - |u1|^2)`` per row, factored for accuracy near the boundary."""
    t = np.linalg.norm(U[:, 1:], axis=1)
    det = (U[:, 0] - t) * (U[:, 0] + t)
    if np.any(det <= 0):
        raise FloatingPointError("iterate left the interior of a Lorentz cone")
    return np.sqrt(det)


class _Scaling:
    """Nesterov-Todd scaling W with ``W z = W^{-1} x = lambda``."""

    def __init__(self, L, x, z):
        self.L = L
        nl = L.nl
        if np.any(x[:nl] <= 0) or np.any(z[:nl] <= 0):
            raise FloatingPointError("iterate left the nonnegative orthant")
        self.dl = np.sqrt(x[:nl] / z[:nl])
        self.blocks = []
        for loc in L.soc_loc:
            X, Z = x[loc], z[loc]
            xn = _lorentz_norm(X)
            zn = _lorentz_norm(Z)
            Xb = X / xn[:, None]
            Zb = Z / zn[:, None]
            gam = np.sqrt(0.5 * (1.0 + np.einsum("ij,ij->i", Xb, Zb)))
            w = np.empty_like(Xb)
            w[:, 0] = (Xb[:, 0] + Zb[:, 0]) / (2 * gam)
            w[:, 1:] = (Xb[:, 1:] - Zb[:, 1:]) / (2 * gam)[:, None]
            eta = np.sqrt(xn / zn)
            self.blocks.append((w, eta))

    def _apply(self, u, inverse, power=1):
        L = self.L
        out = np.empty_like(u)
        sc = self.dl if not inverse else 1.0 / self.dl
        out[:L.nl] = u[:L.nl] * sc[:, None] ** power if u.ndim == 2 else u[:L.nl] * sc ** power
        for loc, (w, eta) in zip(L.soc_loc, self.blocks):
            U = u[loc]
            for _ in range(power):
                U = self._block(U, w, eta, inverse)
            out[loc] = U
        return out

    @staticmethod
    def _block(U, w, eta, inverse):
        # U has shape (k, m) or (k, m, r)
        w0, w1 = w[:, 0], w[:, 1:]
        sgn = -1.0 if inverse else 1.0
        fac = 1.0 / eta if inverse else eta
        if U.ndim == 2:
            u0, u1 = U[:, 0], U[:, 1:]
            d = np.einsum("ij,ij->i", w1, u1)
            out = np.empty_like(U)
            out[:, 0] = w0 * u0 + sgn * d
            out[:, 1:] = sgn * u0[:, None] * w1 + u1 + (d / (1 + w0))[:, None] * w1
            return out * fac[:, None]
        u0, u1 = U[:, 0, :], U[:, 1:, :]
        d = np.einsum("ij,ijr->ir", w1, u1)
        out = np.empty_like(U)
        out[:, 0, :] = w0[:, None] * u0 + sgn * d
        out[:, 1:, :] = (sgn * u0[:, None, :] * w1[:, :, None] + u1
                         + (d / (1 + w0)[:, None])[:, None, :] * w1[:, :, None])
        return out * fac[:, None, None]

    def W(self, u):
        return self._apply(u, False)

    def Winv(self, u):
        return self._apply(u, True)

    def W2(self, u):
        return self._apply(u, False, power=2)


def _independent_rows(A, b):
    """Drop linearly dependent equality rows; report inconsistency."""
    if A.shape[0] == 0:
        return np.zeros(0, int), True
    Q, R, piv = sla.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0) * 10
    rank = int(np.sum(diag > tol))
    keep = np.sort(piv[:rank])
    if rank == A.shape[0]:
        return keep, True
    Ak = A[keep]
    coef = np.linalg.lstsq(Ak.T, A.T, rcond=None)[0]
    res = b - coef.T @ b[keep]
    consistent = bool(np.abs(res).max() <= 1e-9 * (1 + np.abs(b).max()))
    return keep, consistent


def solve_socp(cp, tol=1e-6, max_iter=200):
    """Solve ``cp`` and return a :class:`SolveReport` (``y``, ``z`` dual)."""
    L = _Layout(cp.cones)
    c, b = cp.c, cp.b
    keep, consistent = _independent_rows(cp.A, b)
    if not consistent:
        return SolveReport(INFEASIBLE, info={"reason": "inconsistent equalities"})
    A = cp.A[keep]
    bk = b[keep]
    m = A.shape[0]
    Ac = A[:, L.cidx]
    Af = A[:, L.free]
    cc, cf = c[L.cidx], c[L.free]
    nf = L.free.size
    nb = 1.0 + np.linalg.norm(bk)
    ncn = 1.0 + np.linalg.norm(c)

    def factor(scal):
        if scal is None:
            G = Ac
        else:
            G = scal.W(Ac.T).T
        M = G @ G.T
        K = np.zeros((m + nf, m + nf))
        K[:m, :m] = M
        K[:m, m:] = Af
        K[m:, :m] = Af.T
        reg = 1e-13 * (1.0 + np.abs(np.diag(M)).max(initial=0.0))
        K[:m, :m] += reg * np.eye(m)
        K[m:, m:] -= reg * np.eye(nf)
        return sla.lu_factor(K, check_finite=False), K

    def kkt_once(fac, K, scal, rp, rdc, rdf, ds):
        wd = scal.W(ds)
        rhs = np.concatenate([rp - Ac @ wd + Ac @ scal.W2(rdc), rdf])
        sol = sla.lu_solve(fac, rhs, check_finite=False)
        sol += sla.lu_solve(fac, rhs - K @ sol, check_finite=False)
        dy, dxf = sol[:m], sol[m:]
        dzc = rdc - Ac.T @ dy
        dxc = wd - scal.W2(dzc)
        return dxc, dxf, dy, dzc

    def kkt_solve(fac, K, scal, rp, rdc, rdf, ds):
        # Newton system in (dx, dy, dz) with W^-1 dx + W dz = ds, refined on
        # the unreduced equations to undo cancellation when W is ill-conditioned
        out = kkt_once(fac, K, scal, rp, rdc, rdf, ds)
        for _ in range(3):
            dxc, dxf, dy, dzc = out
            e1 = rp - Ac @ dxc - Af @ dxf
            e2 = rdc - Ac.T @ dy - dzc
            e3 = rdf - Af.T @ dy
            e4 = ds - scal.Winv(dxc) - scal.W(dzc)
            err = max(np.abs(e1).max(initial=0.0), np.abs(e3).max(initial=0.0))
            if err <= 1e-15 * (1.0 + np.abs(rp).max(initial=0.0)):
                break
            corr = kkt_once(fac, K, scal, e1, e2, e3, e4)
            out = tuple(u + v for u, v in zip(out, corr))
        return out

    # starting point from least-squares solves
    fac0, K0 = factor(None)
    sol = sla.lu_solve(fac0, np.concatenate([bk, np.zeros(nf)]), check_finite=False)
    y0 = sol[:m]
    xc = Ac.T @ y0
    xf = sol[m:]
    sol = sla.lu_solve(fac0, np.concatenate([Ac @ cc, cf]), check_finite=False)
    y = sol[:m]
    zc = cc - Ac.T @ y
    xc = _shift_into_cone(L, xc)
    zc = _shift_into_cone(L, zc)

    e = L.identity()
    nu = max(L.degree, 1)
    status = MAX_ITER
    it = 0
    hist = None
    for it in range(max_iter + 1):
        rp = bk - Ac @ xc - Af @ xf
        rdc = cc - Ac.T @ y - zc
        rdf = cf - Af.T @ y
        pobj = float(cc @ xc + cf @ xf)
        dobj = float(bk @ y)
        gap = float(xc @ zc)
        pres = np.linalg.norm(rp) / nb
        dres = np.sqrt(np.linalg.norm(rdc) ** 2 + np.linalg.norm(rdf) ** 2) / ncn
        rel_gap = min(gap, abs(pobj - dobj)) / (1.0 + min(abs(pobj), abs(dobj)))
        hist = (pres, dres, rel_gap)
        if pres <= tol and dres <= tol and rel_gap <= tol:
            status = OPTIMAL
            break
        # infeasibility certificates
        if dobj > 0:
            yn = y / dobj
            if np.linalg.norm(Ac.T @ yn + zc / dobj) + np.linalg.norm(Af.T @ yn) <= tol \
                    and dobj > 1.0 / tol * ncn:
                status = INFEASIBLE
                break
        if pobj < 0:
            s = -pobj
            if np.linalg.norm(Ac @ xc + Af @ xf) / s <= tol and s > 1.0 / tol * nb:
                status = UNBOUNDED
                break
        if it == max_iter:
            break
        try:
            scal = _Scaling(L, xc, zc)
            lam = scal.W(zc)
            fac, K = factor(scal)
        except (FloatingPointError, np.linalg.LinAlgError, ValueError):
            break
        mu = gap / nu
        # predictor
        with np.errstate(invalid="ignore", divide="ignore"):
            rc = -_jprod(L, lam, lam)
            ds = _jdiv(L, lam, rc)
        if not np.all(np.isfinite(ds)):
            # the scaled point sits on the cone boundary; keep the last iterate
            break
        dxc, dxf, dy, dzc = kkt_solve(fac, K, scal, rp, rdc, rdf, ds)
        dxs, dzs = scal.Winv(dxc), scal.W(dzc)
        a_aff = min(1.0, _max_step(L, lam, dxs), _max_step(L, lam, dzs))
        mu_aff = float((xc + a_aff * dxc) @ (zc + a_aff * dzc)) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0
        # corrector
        rc = sigma * mu * e - _jprod(L, lam, lam) - _jprod(L, dxs, dzs)
        with np.errstate(invalid="ignore", divide="ignore"):
            ds = _jdiv(L, lam, rc)
        if not np.all(np.isfinite(ds)):
            break
        dxc, dxf, dy, dzc = kkt_solve(fac, K, scal, rp, rdc, rdf, ds)
        if not all(np.all(np.isfinite(u)) for u in (dxc, dxf, dy, dzc)):
            break
        dxs, dzs = scal.Winv(dxc), scal.W(dzc)
        a = min(1.0, 0.99 * _max_step(L, lam, dxs), 0.99 * _max_step(L, lam, dzs))
        if not np.isfinite(a) or a <= 1e-14:
            break
        xc = xc + a * dxc
        xf = xf + a * dxf
        y = y + a * dy
        zc = zc + a * dzc

    x = np.zeros(L.n)
    x[L.cidx] = xc
    x[L.free] = xf
    z = np.zeros(L.n)
    z[L.cidx] = zc
    yfull = np.zeros(cp.A.shape[0])
    yfull[keep] = y
    value = float(c @ x)
    dval = float(b @ yfull)
    return SolveReport(status, value=value if status == OPTIMAL else np.nan, x=x, y=yfull,
                       z=z, dual_value=dval, primal_residual=hist[0], dual_residual=hist[1],
                       gap=hist[2], iterations=it,
                       info={"objective": value})
