"""Complex polytope method.

The ellipse ``E0 = E(v0)`` lies in ``P`` whenever ``v0`` lies in the balanced
complex hull of the vertices ``v_k`` and their conjugates.  The largest
``t0`` with ``t0 v0 = sum z_j w_j``, ``sum |z_j| <= 1`` is a second-order
cone program; ``t0 >= 1`` proves containment, ``t0 < 1/2`` refutes it.
"""
from dataclasses import dataclass, field

import numpy as np

from .geometry import ComplexVertexSet, DimensionError, NormBracket, conjugate_closure
from .solvers import NONNEG, SOC, ConeProgram, SolverError, solve_socp
from .verdict import INSIDE, QINSIDE, EeVerdict, outside_verdict

INSIDE_TOL = 1e-6


@dataclass
class CpmResult:
    t0_max: float
    z: np.ndarray
    vertices: ComplexVertexSet
    report: object = field(default=None, repr=False)
    directions: tuple = field(default=(), repr=False)

    @property
    def norm_bracket(self):
        """Bracket for the smallest ``lam`` with ``E0`` inside ``lam P``."""
        t = self.t0_max
        if t <= 0:
            return NormBracket(np.inf, np.inf)
        if np.isinf(t):
            return NormBracket(0.0, 0.0)
        return NormBracket(0.5 / t, 1.0 / t)


def build_cp(v0, verts):
    """Cone program for ``max t0`` over the balanced hull of ``verts``.

    Variable order: ``t0, slack, (r_j, t_j, u_j) for each vertex``.
    """
    v0 = np.asarray(v0, dtype=complex)
    W = np.array(verts, dtype=complex).reshape(len(verts), -1)
    M, d = W.shape
    p, q = W.real, W.imag
    n = 2 + 3 * M
    A = np.zeros((2 * d + 1, n))
    A[:d, 0] = v0.real
    A[d:2 * d, 0] = v0.imag
    # real part: t p - u q ; imaginary part: u p + t q
    A[:d, 3 + 3 * np.arange(M)] = -p.T
    A[:d, 4 + 3 * np.arange(M)] = q.T
    A[d:2 * d, 3 + 3 * np.arange(M)] = -q.T
    A[d:2 * d, 4 + 3 * np.arange(M)] = -p.T
    A[2 * d, 1] = 1.0
    A[2 * d, 2 + 3 * np.arange(M)] = 1.0
    b = np.zeros(2 * d + 1)
    b[2 * d] = 1.0
    c = np.zeros(n)
    c[0] = -1.0
    cones = [(NONNEG, 2)] + [(SOC, 3)] * M
    return ConeProgram(c, A, b, cones)


def cpm_value(e0, p, closure=True, tol=1e-9):
    """Largest ``t0`` with ``t0 v0`` in the balanced complex hull of ``P``."""
    if e0.d != p.d:
        raise DimensionError(f"ellipse in R^{e0.d} vs polytope in R^{p.d}")
    vs = ComplexVertexSet.from_polytope(p)
    if closure:
        vs = conjugate_closure(vs)
    v0 = e0.v
    if not np.any(v0):
        return CpmResult(np.inf, np.zeros(len(vs), complex), vs)
    cp = build_cp(v0, vs.vertices)
    rep = solve_socp(cp, tol=tol)
    near = max(rep.primal_residual, rep.dual_residual, rep.gap) <= 1e-6
    if not (rep.ok or near):
        raise SolverError(f"complex polytope program ended with status {rep.status!r}", rep)
    x = rep.x
    M = len(vs)
    z = x[3 + 3 * np.arange(M)] + 1j * x[4 + 3 * np.arange(M)]
    d = e0.d
    y = rep.y
    return CpmResult(max(float(x[0]), 0.0), z, vs, rep, (y[:d].copy(), y[d:2 * d].copy()))


def _hints(res):
    y1, y2 = res.directions
    out = [y1, y2]
    for th in np.linspace(0, np.pi, 12, endpoint=False)[1:]:
        out.append(np.cos(th) * y1 + np.sin(th) * y2)
    return out


def cpm_decide(e0, p, closure=True, tol=1e-9):
    """Decide with factor one half: Inside, Outside, or QInside(1/2)."""
    res = cpm_value(e0, p, closure, tol)
    t = res.t0_max
    if t >= 1.0 - INSIDE_TOL:
        return EeVerdict(INSIDE, 1.0, value=t, method="cpm", details={"cpm": res})
    if t < 0.5:
        return outside_verdict(e0, p, 0.5, "cpm", _hints(res), value=t, cpm=res)
    return EeVerdict(QINSIDE, 0.5, value=t, method="cpm", details={"cpm": res})
