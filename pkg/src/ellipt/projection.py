"""Polygonal lifting of ellipses.

The regular ``2^n``-gon of circumradius ``r`` is the projection of a
polyhedron in ``2n + 3`` variables with ``3n + 3`` constraints, built by
``n`` successive reflections of a triangle.  Replacing every ellipse of
``P`` by its inscribed affine-regular polygon turns the polytope norm into
one sparse LP whose value overestimates the norm by at most the factor
``1 / cos(pi / 2^n)``.
"""
from dataclasses import dataclass

import numpy as np

from .cutting import _outside_span, cut_decide
from .geometry import DimensionError, NormBracket
from .solvers import LinearProgram, SolverError, solve_lp

MIN_LEVEL = 2


def alpha(m):
    return np.pi / 2.0 ** m


def _cos_sin(m):
    # exact values where rounding would leave spurious tiny coefficients
    if m == 0:
        return -1.0, 0.0
    if m == 1:
        return 0.0, 1.0
    return np.cos(alpha(m)), np.sin(alpha(m))


def polygon_factor(n):
    """Ratio of inradius to circumradius of the regular ``2^n``-gon."""
    return float(np.cos(alpha(n)))


def choose_level(q):
    """Smallest level ``n >= 2`` with ``cos(pi / 2^n) >= sqrt(q)``."""
    if not (0.0 < q < 1.0):
        raise ValueError("the factor q must lie in (0, 1)")
    n = MIN_LEVEL
    while polygon_factor(n) < np.sqrt(q):
        n += 1
    return n


@dataclass
class LiftedPolygonSystem:
    """Rows ``coef . (r, x_1, ..., x_{2n+2}) (sense) 0``; sense is ``<=`` or ``=``.

    Column 0 is ``r``; column ``s`` is ``x_s``.  The last two columns carry
    the point of the polygon.
    """
    n: int
    coef: np.ndarray
    sense: np.ndarray

    @property
    def n_vars(self):
        return 2 * self.n + 3

    @property
    def n_constraints(self):
        return self.coef.shape[0]

    def singleton_rows(self):
        return np.flatnonzero(np.count_nonzero(self.coef, axis=1) == 1)

    def support(self, u, r=1.0):
        """Support function of the projected polygon in direction ``u``."""
        n = self.n
        c = np.zeros(self.n_vars)
        c[2 * n + 1], c[2 * n + 2] = -u[0], -u[1]
        ub = self.coef[self.sense == "<="]
        eq = self.coef[self.sense == "="]
        lb = np.full(self.n_vars, -np.inf)
        ub_r = np.full(self.n_vars, np.inf)
        lb[0] = ub_r[0] = r
        rep = solve_lp(LinearProgram(c, eq, np.zeros(len(eq)), ub, np.zeros(len(ub)), lb, ub_r))
        rep.require_optimal("polygon support")
        return -rep.value


def build_lifted_polygon(n):
    """The system describing ``r T_n``, the regular ``2^n``-gon of circumradius r."""
    if n < MIN_LEVEL:
        raise ValueError(f"level n must be at least {MIN_LEVEL}")
    nv = 2 * n + 3
    rows, sense = [], []

    def row():
        return np.zeros(nv)

    # the initial triangle: 0 <= x2 <= x1 tan(alpha_{n-1}), x1 + x2 tan(alpha_n) <= r
    v = row()
    v[2] = -1.0
    rows.append(v)
    sense.append("<=")
    v = row()
    v[2] = 1.0
    v[1] = -np.tan(alpha(n - 1))
    rows.append(v)
    sense.append("<=")
    v = row()
    v[1] = 1.0
    v[2] = np.tan(alpha(n))
    v[0] = -1.0
    rows.append(v)
    sense.append("<=")
    for k in range(1, n + 1):
        c, s = _cos_sin(n - k)
        i1, i2, j1, j2 = 2 * k + 1, 2 * k + 2, 2 * k - 1, 2 * k
        # reflection about the line at angle alpha_{n-k}
        v = row()
        v[i1], v[i2], v[j1], v[j2] = c, s, -c, -s
        rows.append(v)
        sense.append("=")
        for sg in (1.0, -1.0):
            v = row()
            v[i1], v[i2] = -sg * s, sg * c
            v[j1] -= s
            v[j2] += c
            rows.append(v)
            sense.append("<=")
    coef = np.array(rows)
    coef[np.abs(coef) < 1e-300] = 0.0
    return LiftedPolygonSystem(n, coef, np.array(sense))


@dataclass
class WLinProgram:
    """The norm LP in sparse triplet form with its size accounting."""
    n: int
    N: int
    d: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    sense: np.ndarray
    rhs: np.ndarray
    c: np.ndarray

    @property
    def n_vars(self):
        return (2 * self.n + 3) * self.N

    @property
    def n_constraints(self):
        # the objective row counts as one more linear constraint in the tally
        return self.sense.size + 1

    @property
    def nnz(self):
        return int(np.count_nonzero(self.vals))

    def dense(self):
        M = np.zeros((self.sense.size, self.n_vars))
        np.add.at(M, (self.rows, self.cols), self.vals)
        return M

    def to_linear_program(self):
        """Dense LP with sign rows on single variables turned into bounds."""
        M = self.dense()
        nz = np.count_nonzero(M, axis=1)
        lb = np.full(self.n_vars, -np.inf)
        keep = np.ones(M.shape[0], dtype=bool)
        for i in np.flatnonzero((nz == 1) & (self.sense == "<=") & (self.rhs == 0)):
            j = int(np.flatnonzero(M[i])[0])
            if M[i, j] < 0:
                lb[j] = max(lb[j], 0.0)
                keep[i] = False
        eq = keep & (self.sense == "=")
        ub = keep & (self.sense == "<=")
        return LinearProgram(self.c, M[eq], self.rhs[eq], M[ub], self.rhs[ub], lb)

    def eq_rows_w(self):
        """Positions of the ``w`` rows among the equality rows of ``to_linear_program``."""
        eq_idx = np.flatnonzero(self.sense == "=")
        return np.searchsorted(eq_idx, np.arange(self.sense.size - self.d, self.sense.size))


def assemble_wlin(w, p, n):
    """Sparse LP for the polygonal norm of ``w``; asserts the size bounds."""
    sysn = build_lifted_polygon(n)
    nv = sysn.n_vars
    N, d = p.N, p.d
    blk_r, blk_c = np.nonzero(sysn.coef)
    blk_v = sysn.coef[blk_r, blk_c]
    m_blk = sysn.n_constraints + 1  # plus the sign row of r
    rows, cols, vals, sense = [], [], [], []
    for j in range(N):
        rows.append(blk_r + j * m_blk)
        cols.append(blk_c + j * nv)
        vals.append(blk_v)
        sense.extend(sysn.sense)
        rows.append(np.array([j * m_blk + sysn.n_constraints]))
        cols.append(np.array([j * nv]))
        vals.append(np.array([-1.0]))
        sense.append("<=")
    base = N * m_blk
    ii = np.repeat(np.arange(d), N)
    jj = np.tile(np.arange(N), d)
    for arr, off in ((p.A, 2 * n + 1), (p.B, 2 * n + 2)):
        v = arr[jj, ii]
        mask = v != 0
        rows.append(base + ii[mask])
        cols.append(jj[mask] * nv + off)
        vals.append(v[mask])
    sense.extend(["="] * d)
    rhs = np.zeros(base + d)
    rhs[base:] = w
    c = np.zeros(nv * N)
    c[::nv] = 1.0
    lp = WLinProgram(n, N, d, np.concatenate(rows), np.concatenate(cols),
                     np.concatenate(vals), np.array(sense), rhs, c)
    assert lp.n_vars == (2 * n + 3) * N
    assert lp.n_constraints == (3 * n + 4) * N + d + 1
    assert lp.nnz <= (12 * n + 2 * d + 7) * N + d
    return lp


def pe_norm_lp(w, p, n):
    """Bracket ``[r cos(pi/2^n), r]`` for the polytope norm, ``r`` the LP value."""
    w = np.asarray(w, dtype=float)
    if w.size != p.d:
        raise DimensionError(f"vector of length {w.size} vs polytope in R^{p.d}")
    if n < MIN_LEVEL:
        raise ValueError(f"level n must be at least {MIN_LEVEL}")
    if not w.any():
        return NormBracket(0.0, 0.0, direction=np.zeros_like(w))
    if not p.spans(w):
        return _outside_span(w, p)
    wl = assemble_wlin(w, p, n)
    rep = solve_lp(wl.to_linear_program())
    if not rep.ok:
        raise SolverError(f"polygonal norm LP ended with status {rep.status!r}", rep)
    r = float(rep.value)
    y = rep.y[wl.eq_rows_w()]
    lo = r * polygon_factor(n)
    hp = p.support(y)
    if hp > 0:
        lo = max(lo, float(w @ y) / hp)
    return NormBracket(min(lo, r), r, direction=y)


def proj_decide(e0, p, q=0.995, n=None, max_iter=200):
    """Corner cutting driven by the polygonal norm oracle.

    The level ``n`` defaults to the smallest one whose polygon factor is at
    least ``sqrt(q)``; the cutting loop then stops once the certified factor
    (which already includes the polygon loss) reaches ``q``.
    """
    if n is None:
        n = choose_level(q)
    v = cut_decide(e0, p, q=q, max_iter=max_iter, norm=lambda w: pe_norm_lp(w, p, n),
                   method="projection")
    v.details["level"] = n
    v.details["polygon_factor"] = polygon_factor(n)
    return v
