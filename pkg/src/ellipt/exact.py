"""Exact ellipse-in-polytope decisions in the plane and in space.

Both rest on the same reformulation: ``E0`` is not in ``P`` iff some
direction ``x`` has ``x^T (G0 - G_k) x > 0`` for every ``k``, where
``G = a a^T + b b^T`` is the Gram matrix of an ellipse.
"""
from dataclasses import dataclass, field

import numpy as np

from .geometry import DimensionError, separation_margin

# ties (E0 touching P from inside) count as contained
TIE_SHRINK = 1.0 - 1e-12


def _forms(e0, p):
    G0 = TIE_SHRINK * (np.outer(e0.a, e0.a) + np.outer(e0.b, e0.b))
    Gk = np.einsum("ki,kj->kij", p.A, p.A) + np.einsum("ki,kj->kij", p.B, p.B)
    return G0[None, :, :] - Gk


# --------------------------------------------------------------------------
# d = 2
# --------------------------------------------------------------------------

@dataclass
class SlopeSet:
    """Union of open intervals of slopes ``s = y/x``, plus the vertical slope.

    ``intervals`` are disjoint and sorted, endpoints may be infinite;
    ``vertical`` marks membership of the direction ``x = 0``.
    """
    intervals: list = field(default_factory=list)
    vertical: bool = False

    @classmethod
    def everything(cls):
        return cls([(-np.inf, np.inf)], True)

    @classmethod
    def from_quadratic(cls, A, B, C):
        """Slopes with ``A s^2 + 2 B s + C > 0`` (vertical iff ``A > 0``)."""
        if A == 0.0:
            if B > 0:
                return cls([(-C / (2 * B), np.inf)], False)
            if B < 0:
                return cls([(-np.inf, -C / (2 * B))], False)
            return cls([(-np.inf, np.inf)] if C > 0 else [], False)
        disc = B * B - A * C
        if disc < 0:
            return cls.everything() if A > 0 else cls()
        sq = np.sqrt(disc)
        qq = -(B + np.copysign(sq, B))
        if qq == 0.0:
            r1 = r2 = 0.0
        else:
            r1, r2 = sorted((qq / A, C / qq))
        if A > 0:
            return cls([(-np.inf, r1), (r2, np.inf)], True)
        return cls([(r1, r2)] if r1 < r2 else [], False)

    def intersect(self, other):
        out = []
        for lo1, hi1 in self.intervals:
            for lo2, hi2 in other.intervals:
                lo, hi = max(lo1, lo2), min(hi1, hi2)
                if lo < hi:
                    out.append((lo, hi))
        out.sort()
        return SlopeSet(out, self.vertical and other.vertical)

    @property
    def empty(self):
        return not self.intervals and not self.vertical

    def witness(self):
        """A direction ``(x, y)`` with slope in the set, or ``None``."""
        if self.vertical:
            return np.array([0.0, 1.0])
        for lo, hi in self.intervals:
            if np.isinf(lo) and np.isinf(hi):
                s = 0.0
            elif np.isinf(lo):
                s = hi - 1.0 - abs(hi)
            elif np.isinf(hi):
                s = lo + 1.0 + abs(lo)
            else:
                s = 0.5 * (lo + hi)
            return np.array([1.0, s])
        return None


def _check(e0, p, d):
    if e0.d != d or p.d != d:
        raise DimensionError(f"this routine needs d = {d}, got E0 in R^{e0.d}, P in R^{p.d}")


def slope_set_2d(e0, p):
    Q = _forms(e0, p)
    s = SlopeSet.everything()
    for Qk in Q:
        s = s.intersect(SlopeSet.from_quadratic(Qk[1, 1], Qk[0, 1], Qk[0, 0]))
        if s.empty:
            break
    return s


def separator_2d(e0, p):
    """Direction with positive separation margin, or ``None`` when E0 is in P."""
    _check(e0, p, 2)
    x = slope_set_2d(e0, p).witness()
    if x is None:
        return None
    return x / np.linalg.norm(x)


def decide_ee_2d(e0, p):
    """True iff ``E0`` is contained in ``P`` (plane, exact up to rounding)."""
    return separator_2d(e0, p) is None


# --------------------------------------------------------------------------
# d = 3
# --------------------------------------------------------------------------

class RootFindingError(RuntimeError):
    pass


# fixed generic rotation so that axis-aligned inputs do not hit degenerate
# leading coefficients in the resultant
_ROT = np.linalg.qr(np.random.default_rng(20240611).standard_normal((3, 3)))[0]
_ROT2 = np.linalg.qr(np.random.default_rng(7).standard_normal((2, 2)))[0]


class _Conic:
    """``g(x, y) = X^T Q X`` with ``X = (x, y, 1)`` minus a constant ``eps``."""

    def __init__(self, Q, eps=0.0):
        self.Q = Q
        self.eps = eps
        self.scale = max(np.abs(Q).max(), eps, 1e-300)

    def __call__(self, x, y):
        Q = self.Q
        return (Q[0, 0] * x * x + 2 * Q[0, 1] * x * y + Q[1, 1] * y * y
                + 2 * Q[0, 2] * x + 2 * Q[1, 2] * y + Q[2, 2] - self.eps)

    def grad(self, x, y):
        Q = self.Q
        return (2 * (Q[0, 0] * x + Q[0, 1] * y + Q[0, 2]),
                2 * (Q[0, 1] * x + Q[1, 1] * y + Q[1, 2]))

    def in_y(self):
        """Coefficients of g as a quadratic in y, each a polynomial in x (high first)."""
        Q = self.Q
        return (np.array([Q[1, 1]]),
                np.array([2 * Q[0, 1], 2 * Q[1, 2]]),
                np.array([Q[0, 0], 2 * Q[0, 2], Q[2, 2] - self.eps]))

    def lagrange(self):
        """Conic of points where the gradient is parallel to the position."""
        Q = self.Q
        # x g_y - y g_x, halved
        L = np.zeros((3, 3))
        L[0, 0] = Q[0, 1]
        L[1, 1] = -Q[0, 1]
        L[0, 1] = L[1, 0] = 0.5 * (Q[1, 1] - Q[0, 0])
        L[0, 2] = L[2, 0] = 0.5 * Q[1, 2]
        L[1, 2] = L[2, 1] = -0.5 * Q[0, 2]
        return _Conic(L)


def _swap(c):
    P = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1.0]])
    return _Conic(P @ c.Q @ P, c.eps)


def _resultant(c1, c2):
    a2, a1, a0 = c1.in_y()
    b2, b1, b0 = c2.in_y()
    pm, pa = np.polymul, np.polyadd
    t1 = pa(pm(a2, b0), -pm(a0, b2))
    t2 = pa(pm(a2, b1), -pm(a1, b2))
    t3 = pa(pm(a1, b0), -pm(a0, b1))
    return pa(pm(t1, t1), -pm(t2, t3))


def _newton(c1, c2, x, y, iters=60):
    for _ in range(iters):
        F = np.array([c1(x, y), c2(x, y)])
        if np.abs(F).max() <= 1e-15 * max(c1.scale, c2.scale) * (1 + x * x + y * y):
            break
        (j11, j12), (j21, j22) = c1.grad(x, y), c2.grad(x, y)
        det = j11 * j22 - j12 * j21
        if abs(det) > 1e-14 * (abs(j11 * j22) + abs(j12 * j21)):
            x, y = x - (j22 * F[0] - j12 * F[1]) / det, y - (j11 * F[1] - j21 * F[0]) / det
        else:
            J = np.array([[j11, j12], [j21, j22]])
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
            x, y = x + step[0], y + step[1]
        if not (np.isfinite(x) and np.isfinite(y)):
            break
    return x, y


def _residual(c1, c2, x, y):
    s = 1.0 + x * x + y * y
    return max(abs(c1(x, y)) / (c1.scale * s), abs(c2(x, y)) / (c2.scale * s))


def _intersect(c1, c2):
    """Real common points of two conics; empty list when they share a component."""
    # eliminate the variable whose quadratic coefficients are both well away from zero
    swapped = False
    if min(abs(c1.Q[1, 1]), abs(c2.Q[1, 1])) < min(abs(c1.Q[0, 0]), abs(c2.Q[0, 0])):
        c1, c2 = _swap(c1), _swap(c2)
        swapped = True
    res = _resultant(c1, c2)
    sc = c1.scale * c2.scale
    if np.abs(res).max(initial=0.0) <= 1e-13 * sc * sc:
        return []
    res = np.trim_zeros(np.where(np.abs(res) <= 1e-15 * sc * sc, 0.0, res), "f")
    if res.size <= 1:
        return []
    pts = []
    for r in np.roots(res):
        near = abs(r.imag) <= 1e-6 * (1.0 + abs(r))
        if not near:
            continue
        x = r.real
        ys = []
        for c in (c1, c2):
            a2, a1, a0 = (np.polyval(q, x) for q in c.in_y())
            if abs(a2) > 1e-14 * c.scale:
                ys.extend(v.real for v in np.roots([a2, a1, a0]))
            elif abs(a1) > 1e-14 * c.scale:
                ys.append(-a0 / a1)
        best = None
        for y in ys:
            xp, yp = _newton(c1, c2, x, y)
            if not (np.isfinite(xp) and np.isfinite(yp)):
                continue
            rr = _residual(c1, c2, xp, yp)
            if best is None or rr < best[0]:
                best = (rr, xp, yp)
            if rr <= 1e-7:
                pts.append((yp, xp) if swapped else (xp, yp))
        if best is None or best[0] > 1e-7:
            if abs(r.imag) <= 1e-12 * (1.0 + abs(r)) and best is not None and best[0] > 1e-4:
                raise RootFindingError(
                    f"conic intersection residual {best[0]:.2e} exceeds 1e-7 after polishing")
    return pts


def _sample_on(c):
    """A few points of the conic, from lines through the origin."""
    pts = []
    for t in np.linspace(0.1, np.pi, 4, endpoint=False):
        u = np.array([np.cos(t), np.sin(t), 0.0])
        Q = c.Q
        e = np.array([0.0, 0.0, 1.0])
        # X = s u + e : quadratic in s
        qa = u @ Q @ u
        qb = 2 * u @ Q @ e
        qc = e @ Q @ e - c.eps
        for s in np.roots([qa, qb, qc]) if abs(qa) > 0 else ([-qc / qb] if qb else []):
            if abs(np.imag(s)) < 1e-12:
                s = float(np.real(s))
                pts.append((s * u[0], s * u[1]))
    return pts


def _candidates(Q, eps):
    """Candidate points of ``{X^T Q_k X >= eps}`` in the chart ``z = 1``."""
    conics = [_Conic(Qk, eps) for Qk in Q]
    pts = [(0.0, 0.0)]
    for i, c in enumerate(conics):
        lag = c.lagrange()
        if np.abs(lag.Q).max() <= 1e-14 * c.scale:
            pts.extend(_sample_on(c))
        else:
            pts.extend(_intersect(c, lag))
        for cj in conics[i + 1:]:
            pts.extend(_intersect(c, cj))
    return np.array(pts, dtype=float).reshape(-1, 2)


def _search_chart(Q, eps):
    pts = _candidates(Q, eps)
    X = np.column_stack([pts, np.ones(len(pts))])
    vals = np.einsum("mi,kij,mj->mk", X, Q, X)
    ok = np.all(vals >= 0.5 * eps, axis=1)
    if np.any(ok):
        i = int(np.flatnonzero(ok)[np.argmax(vals[ok].min(axis=1))])
        return X[i]
    return None


def separator_3d(e0, p, eps=None):
    """Direction with positive separation margin, or ``None`` when E0 is in P."""
    _check(e0, p, 3)
    Q = _forms(e0, p)
    if eps is None:
        scale = np.hypot(np.linalg.norm(e0.a), np.linalg.norm(e0.b))
        eps = 1e-9 * scale * scale
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps == 0 or not np.any(Q):
        return None
    Qr = np.einsum("ia,kab,jb->kij", _ROT.T, Q, _ROT.T)
    # three charts: the distinguished coordinate moves to the last slot
    perms = ([0, 1, 2], [0, 2, 1], [1, 2, 0])
    emb = np.eye(3)
    emb[:2, :2] = _ROT2
    for perm in perms:
        Qp = Qr[:, perm][:, :, perm]
        Qp = np.einsum("ia,kab,jb->kij", emb.T, Qp, emb.T)
        X = _search_chart(Qp, eps)
        if X is not None:
            Xp = emb @ X
            Y = np.empty(3)
            Y[perm] = Xp
            x = _ROT @ Y
            x = x / np.linalg.norm(x)
            if separation_margin(e0, p, x) > 0:
                return x
    return None


def decide_ee_3d(e0, p, eps=None):
    """True iff ``E0`` is contained in ``P`` (space, by candidate exhaustion)."""
    return separator_3d(e0, p, eps) is None


def exact_separator(e0, p, eps=None):
    if e0.d == 2:
        return separator_2d(e0, p)
    if e0.d == 3:
        return separator_3d(e0, p, eps)
    raise DimensionError("exact decisions are implemented for d = 2 and d = 3 only")
