"""One entry point for the ellipse-in-polytope decision, plus hull cleaning."""
import logging

import numpy as np

from .cpm import INSIDE_TOL as CPM_TOL
from .cpm import cpm_value
from .cutting import _segment_decide, cut_decide, pe_norm_socp
from .exact import exact_separator
from .geometry import DimensionError, EllipticPolytope, contained_in_single
from .projection import proj_decide
from .verdict import INSIDE, OUTSIDE, QINSIDE, EeVerdict, outside_verdict

log = logging.getLogger(__name__)

METHODS = ("exact", "cpm", "cutting", "projection", "mixed")


def default_method(d):
    return "exact" if d <= 3 else "mixed"


def exact_decide(e0, p):
    if e0.d > 3:
        raise DimensionError(
            f"exact decisions need d <= 3 (got d = {e0.d}); use one of "
            "'cpm', 'cutting', 'projection' or 'mixed'")
    x = exact_separator(e0, p)
    if x is None:
        return EeVerdict(INSIDE, 1.0, method="exact")
    return outside_verdict(e0, p, 1.0, "exact", [x])


def _cpm_hints(res):
    y1, y2 = res.directions
    return [y1, y2] + [np.cos(t) * y1 + np.sin(t) * y2 for t in np.linspace(0, np.pi, 12)[1:-1]]


def mixed_decide(e0, p, bound=(1.0, 1.0), q=0.995):
    """Complex polytope method first, projection method only when needed.

    The cpm value ``t0`` brackets the norm of ``E0`` in ``[1/(2 t0), 1/t0]``;
    if that bracket misses the range of interest ``bound`` the answer is
    read off directly, otherwise the projection method decides at ``q``.
    Segments need only one norm, which the cone program gives exactly.
    """
    lo, hi = bound
    if not (lo <= 1.0 <= hi):
        raise ValueError("the range of interest must contain 1")
    if not e0.a.any() and not e0.b.any():
        return EeVerdict(INSIDE, 1.0, value=0.0, method="mixed")
    for k, ek in enumerate(p):
        if contained_in_single(e0, ek):
            return EeVerdict(INSIDE, 1.0, value=1.0, method="mixed", details={"contained_in": k})
    if e0.is_degenerate():
        v = _segment_decide(e0, p, lambda w: pe_norm_socp(w, p), q, "mixed")
        v.details["stage"] = "segment"
        return v
    res = cpm_value(e0, p)
    t0 = res.t0_max
    br = res.norm_bracket
    if br.hi <= lo + CPM_TOL:
        return EeVerdict(INSIDE, 1.0, value=t0, method="mixed", details={"stage": "cpm"})
    if br.lo > hi:
        return outside_verdict(e0, p, 0.5, "mixed", _cpm_hints(res), value=t0, stage="cpm")
    v = proj_decide(e0, p, q=q)
    v.method = "mixed"
    v.details["stage"] = "projection"
    v.details["cpm_t0"] = t0
    return v


def decide(e0, p, method=None, q=0.995, **kw):
    """Decide ``E0 in P`` with the named method at factor ``q``."""
    if e0.d != p.d:
        raise DimensionError(f"ellipse in R^{e0.d} vs polytope in R^{p.d}")
    if method is None:
        method = default_method(e0.d)
    if method == "exact":
        return exact_decide(e0, p)
    if method == "cpm":
        from .cpm import cpm_decide
        return cpm_decide(e0, p)
    if method == "cutting":
        return cut_decide(e0, p, q=q, **kw)
    if method == "projection":
        return proj_decide(e0, p, q=q, **kw)
    if method == "mixed":
        return mixed_decide(e0, p, q=q, **kw)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def reduce(p, method=None, q=0.995, return_verdicts=False):
    """Drop ellipses that lie in the hull of the others.

    Ellipses are tested from the largest radius down (later index first on
    ties, so the earliest of several duplicates survives), each against the
    current survivors plus the untested rest.  Only Inside verdicts remove.
    """
    N = p.N
    if method is None:
        method = default_method(p.d)
    alive = np.ones(N, dtype=bool)
    radii = np.array([e.radius() for e in p])
    order = sorted(range(N), key=lambda k: (-radii[k], -k))
    verdicts = {}
    for k in order:
        others = [j for j in range(N) if alive[j] and j != k]
        if not others:
            continue
        rest = EllipticPolytope(tuple(p[j] for j in others))
        v = decide(p[k], rest, method=method, q=q)
        verdicts[k] = v
        if v.outcome == INSIDE:
            alive[k] = False
    out = EllipticPolytope(tuple(p[j] for j in range(N) if alive[j]))
    if return_verdicts:
        return out, np.flatnonzero(alive), verdicts
    return out


__all__ = ["decide", "mixed_decide", "reduce", "exact_decide", "default_method", "METHODS",
           "INSIDE", "OUTSIDE", "QINSIDE"]
