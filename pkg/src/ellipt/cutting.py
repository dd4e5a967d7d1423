"""Corner cutting.

A polygon circumscribed about ``E0`` is refined by cutting the corner of
largest polytope norm.  Each corner is the meeting point of the tangents at
the ends of an arc of the parameter circle; its norm ``||w||_P`` is one
second-order cone program.  Only the upper semicircle is processed since
``E0`` and ``P`` are centrally symmetric.
"""
from dataclasses import dataclass, field

import numpy as np

from .geometry import DimensionError, Ellipse, NormBracket, contained_in_single
from .solvers import SOC, ConeProgram, SolverError, solve_socp
from .verdict import INSIDE, QINSIDE, EeVerdict, outside_verdict

INSIDE_TOL = 1e-7


@dataclass(frozen=True)
class Arc:
    start: float
    end: float
    level: int

    def __post_init__(self):
        if not (0.0 <= self.start < self.end <= np.pi + 1e-15):
            raise ValueError(f"arc [{self.start}, {self.end}] is not inside [0, pi]")

    @property
    def length(self):
        return self.end - self.start

    @property
    def mid(self):
        return 0.5 * (self.start + self.end)

    def halves(self):
        m = self.mid
        return Arc(self.start, m, self.level + 1), Arc(m, self.end, self.level + 1)


def corner_point(e0, arc):
    """Meeting point of the tangents to ``E0`` at the ends of ``arc``."""
    if arc.length >= np.pi:
        raise ValueError("corner points need arcs shorter than pi")
    s = arc.mid
    return (e0.a * np.cos(s) + e0.b * np.sin(s)) / np.cos(0.5 * arc.length)


def _outside_span(w, p):
    """Bracket for a vector outside span(P), with the orthogonal residual as direction."""
    M = np.vstack([p.A, p.B]).T
    coef, *_ = np.linalg.lstsq(M, w, rcond=None)
    res = w - M @ coef
    return NormBracket(np.inf, np.inf, direction=res, in_span=False)


def pe_norm_socp(w, p, tol=1e-9):
    """Norm of ``w`` in the elliptic polytope ``P`` by one cone program.

    ``min sum r_j`` subject to ``sum c_j a_j + s_j b_j = w`` and
    ``|(c_j, s_j)| <= r_j``.  The dual vector gives ``lo = w.y / h_P(y)``, a
    certified lower bound, and the direction of the bracket.
    """
    w = np.asarray(w, dtype=float)
    if w.size != p.d:
        raise DimensionError(f"vector of length {w.size} vs polytope in R^{p.d}")
    if not w.any():
        return NormBracket(0.0, 0.0, direction=np.zeros_like(w))
    if not p.spans(w):
        return _outside_span(w, p)
    N = p.N
    A = np.zeros((p.d, 3 * N))
    A[:, 1::3] = p.A.T
    A[:, 2::3] = p.B.T
    c = np.zeros(3 * N)
    c[0::3] = 1.0
    rep = solve_socp(ConeProgram(c, A, w, [(SOC, 3)] * N), tol=tol)
    if not (rep.ok or max(rep.primal_residual, rep.dual_residual, rep.gap) <= 1e-6):
        raise SolverError(f"norm program ended with status {rep.status!r}", rep)
    y = rep.y
    hp = p.support(y)
    hi = float(rep.x[0::3].sum())
    lo = float(w @ y) / hp if hp > 0 else 0.0
    lo = min(max(lo, 0.0), hi)
    return NormBracket(lo, hi, direction=y)


@dataclass
class CutState:
    arcs: list
    norms: dict = field(default_factory=dict)
    nu_history: list = field(default_factory=list)
    level_reached: dict = field(default_factory=dict)
    iteration: int = 0

    @property
    def nu(self):
        return max(self.norms[a].hi for a in self.arcs)

    def worst_arc(self):
        # largest corner norm, lowest start angle on ties
        best = None
        for a in sorted(self.arcs, key=lambda a: a.start):
            if best is None or self.norms[a].hi > self.norms[best].hi:
                best = a
        return best


def _segment_decide(e0, p, norm, q, method):
    """E0 degenerate: decided by the norm of its half-axis."""
    e = e0.reduced()
    u = e.a if e.a.any() else e.b
    br = norm(u)
    if br.hi <= 1.0 + INSIDE_TOL:
        return EeVerdict(INSIDE, 1.0, value=br.hi, method=method)
    if br.lo > 1.0 or not br.in_span:
        return outside_verdict(e0, p, q, method, [br.direction], value=br.lo)
    return EeVerdict(QINSIDE, 1.0 / br.hi, value=br.hi, method=method)


def cut_decide(e0, p, q=0.995, max_iter=200, norm=None, method="cutting"):
    """Decide ``E0 in P`` at factor ``q`` by adaptive corner cutting.

    ``norm(w)`` must return a :class:`NormBracket` whose ``hi`` bounds the
    polytope norm from above and ``lo`` from below; by default the exact
    cone-program norm is used.
    """
    if e0.d != p.d:
        raise DimensionError(f"ellipse in R^{e0.d} vs polytope in R^{p.d}")
    if not (0.0 < q < 1.0):
        raise ValueError("the factor q must lie in (0, 1)")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if norm is None:
        def norm(w):
            return pe_norm_socp(w, p)
    if not e0.a.any() and not e0.b.any():
        return EeVerdict(INSIDE, 1.0, value=0.0, method=method)
    for k, ek in enumerate(p):
        if contained_in_single(e0, ek):
            return EeVerdict(INSIDE, 1.0, value=1.0, method=method,
                             details={"contained_in": k})
    if e0.is_degenerate():
        return _segment_decide(e0, p, norm, q, method)

    state = CutState([Arc(0.0, 0.5 * np.pi, 1), Arc(0.5 * np.pi, np.pi, 1)])
    lower = 0.0
    lower_dir = None

    def evaluate(arc):
        nonlocal lower, lower_dir
        br = norm(corner_point(e0, arc))
        state.norms[arc] = br
        if not br.in_span:
            lower, lower_dir = np.inf, br.direction
            return
        lb = np.cos(0.5 * arc.length) * br.lo
        if lb > lower:
            lower, lower_dir = lb, br.direction

    for arc in state.arcs:
        evaluate(arc)
    state.level_reached[1] = 0
    while True:
        nu = state.nu
        state.nu_history.append(nu)
        info = {"nu_history": state.nu_history, "iterations": state.iteration,
                "level_reached": state.level_reached, "arcs": len(state.arcs)}
        if nu <= 1.0 + INSIDE_TOL:
            corners = [(a.start, a.end, state.norms[a].hi) for a in state.arcs]
            return EeVerdict(INSIDE, 1.0, value=nu, method=method, corners=corners,
                             details=info)
        if lower > 1.0:
            return outside_verdict(e0, p, q, method, [lower_dir], value=lower, **info)
        if 1.0 / nu >= q or state.iteration >= max_iter:
            return EeVerdict(QINSIDE, 1.0 / nu, value=nu, method=method, details=info)
        arc = state.worst_arc()
        left, right = arc.halves()
        i = state.arcs.index(arc)
        state.arcs[i:i + 1] = [left, right]
        del state.norms[arc]
        evaluate(left)
        evaluate(right)
        state.iteration += 1
        state.level_reached.setdefault(left.level, state.iteration)


def ee_norm(e0, p, q=0.999, max_iter=500, norm=None):
    """Bracket for the smallest ``lam`` with ``E0`` inside ``lam P``.

    Corner cutting run to factor ``q`` on a rescaled copy: the upper bound is
    the largest corner norm, the lower bound the largest norm of an
    evaluated boundary point of ``E0``.
    """
    if norm is None:
        def norm(w):
            return pe_norm_socp(w, p)
    if not e0.a.any() and not e0.b.any():
        return NormBracket(0.0, 0.0)
    if e0.is_degenerate():
        e = e0.reduced()
        br = norm(e.a if e.a.any() else e.b)
        return br
    arcs = [Arc(0.0, 0.5 * np.pi, 1), Arc(0.5 * np.pi, np.pi, 1)]
    norms = {a: norm(corner_point(e0, a)) for a in arcs}
    lo = max(np.cos(0.5 * a.length) * norms[a].lo for a in arcs)
    for _ in range(max_iter):
        hi = max(norms[a].hi for a in arcs)
        if not np.isfinite(hi) or lo >= q * hi:
            break
        arc = max(sorted(arcs, key=lambda a: a.start), key=lambda a: norms[a].hi)
        i = arcs.index(arc)
        halves = arc.halves()
        arcs[i:i + 1] = list(halves)
        for h in halves:
            norms[h] = norm(corner_point(e0, h))
            lo = max(lo, np.cos(0.5 * h.length) * norms[h].lo)
    hi = max(norms[a].hi for a in arcs)
    return NormBracket(min(lo, hi), hi)
