"""Constructions behind the complexity results.

``build_perturbed_lift`` folds a triangle ``n`` times, each time by an
affine symmetry close to a reflection, giving a polyhedron with ``3n + 3``
constraints whose projection is a near-regular ``2^n``-gon with all vertex
distances different.  ``qp_to_ee_reduction`` turns a rank-two quadratic
maximisation over a symmetric polyhedron into an EE instance.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .cutting import ee_norm
from .geometry import DimensionError, Ellipse, EllipticPolytope, NormBracket, fibonacci_sphere
from .projection import alpha
from .solvers import LinearProgram, solve_lp

DISTINCT_TOL = 1e-12
MAX_RESAMPLE = 100


class ConstructionError(RuntimeError):
    pass


def _fold_angle(gamma, a):
    """Angle of the image of the ray at angle 0 under the shear-fold about ``gamma``."""
    s, t = np.cos(gamma), np.sin(gamma)
    return gamma + np.arctan2(t, s + a * t)


def _fold_matrix(gamma, a):
    """Affine symmetry about the line at angle ``gamma``: ``(s, t) -> (s + a t, -t)``."""
    u = np.array([np.cos(gamma), np.sin(gamma)])
    nrm = np.array([-u[1], u[0]])
    m = -nrm
    # X = s u + t m, image = (s + a t) u - t m
    B = np.column_stack([u, m])
    return B @ np.array([[1.0, a], [0.0, -1.0]]) @ np.linalg.inv(B)


def _fold_lines(n, shears):
    """Start angle and fold lines so that the last fold is the abscissa."""
    def end_angle(b0):
        g = b0
        for a in shears[:n - 1]:
            g = _fold_angle(g, a)
        return g

    b_reg = alpha(n - 1)
    if not any(shears[:n - 1]):
        b0 = b_reg
    else:
        b0 = brentq(lambda b: end_angle(b) - np.pi, 0.5 * b_reg, min(1.5 * b_reg, 0.99 * np.pi),
                    xtol=1e-15, rtol=1e-15)
    lines = [b0]
    for a in shears[:n - 1]:
        lines.append(_fold_angle(lines[-1], a))
    lines[-1] = np.pi
    return b0, lines


@dataclass
class PerturbedLift:
    """Polyhedron ``{x in R^(2n+2): A_eq x = b_eq, A_ub x <= b_ub}``.

    Its projection to the last two coordinates is the polygon with
    vertices ``vertices`` (counterclockwise).
    """
    n: int
    shears: np.ndarray
    lines: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    vertices: np.ndarray
    hausdorff: float = 0.0
    min_gap: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def n_facets(self):
        return self.A_ub.shape[0]

    @property
    def dim(self):
        return self.A_eq.shape[1]

    def distances(self):
        return np.linalg.norm(self.vertices, axis=1)

    def projected_support(self, u):
        """Support of the projection in direction ``u``, by linear programming."""
        c = np.zeros(self.dim)
        c[-2:] = -np.asarray(u, dtype=float)
        rep = solve_lp(LinearProgram(c, self.A_eq, self.b_eq, self.A_ub, self.b_ub, -np.inf))
        rep.require_optimal("projected support")
        return -rep.value

    def to_json(self):
        return {"n": self.n, "shears": self.shears.tolist(), "A_eq": self.A_eq.tolist(),
                "b_eq": self.b_eq.tolist(), "A_ub": self.A_ub.tolist(),
                "b_ub": self.b_ub.tolist(), "projection": [self.dim - 2, self.dim - 1],
                "n_facets": self.n_facets}


def _system(n, b0, lines, shears, rb=1.0):
    nv = 2 * n + 2
    eq, ub, rhs = [], [], []
    # triangle O A B with A = (1, 0) and B = rb (cos b0, sin b0)
    r = np.zeros(nv)
    r[1] = -1.0
    ub.append(r)
    rhs.append(0.0)
    r = np.zeros(nv)
    r[0], r[1] = -np.sin(b0), np.cos(b0)
    ub.append(r)
    rhs.append(0.0)
    A = np.array([1.0, 0.0])
    B = rb * np.array([np.cos(b0), np.sin(b0)])
    nab = np.array([B[1] - A[1], A[0] - B[0]])
    r = np.zeros(nv)
    r[0:2] = nab
    ub.append(r)
    rhs.append(float(nab @ A))
    for k in range(1, n + 1):
        g, a = lines[k - 1], shears[k - 1]
        u = np.array([np.cos(g), np.sin(g)])
        nrm = np.array([-u[1], u[0]])
        if k == n:
            u, nrm = np.array([-1.0, 0.0]), np.array([0.0, -1.0])
        new, old = slice(2 * k, 2 * k + 2), slice(2 * k - 2, 2 * k)
        # s_new + (a/2) t_new = s_old + (a/2) t_old with s = u.x, t = -nrm.x
        w = u - 0.5 * a * nrm
        r = np.zeros(nv)
        r[new], r[old] = w, -w
        eq.append(r)
        for sg in (1.0, -1.0):
            r = np.zeros(nv)
            r[new] = -sg * nrm
            r[old] = nrm
            ub.append(r)
            rhs.append(0.0)
    return np.array(eq), np.zeros(n), np.array(ub), np.array(rhs)


def _polygon(n, b0, lines, shears, rb=1.0):
    chain = [np.array([1.0, 0.0]), rb * np.array([np.cos(b0), np.sin(b0)])]
    for k in range(1, n + 1):
        S = _fold_matrix(lines[k - 1], shears[k - 1])
        tail = chain[1:-1] if k == n else chain[:-1]
        chain = chain + [S @ v for v in reversed(tail)]
    return np.array(chain)


def _convex(V):
    e = np.roll(V, -1, axis=0) - V
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return bool(np.all(cross > 0))


def _edge_normal_angles(V):
    e = np.roll(V, -1, axis=0) - V
    return np.mod(np.arctan2(-e[:, 0], e[:, 1]), 2 * np.pi)


def polygon_hausdorff(V, W):
    """Exact Hausdorff distance between two convex polygons (ccw vertex arrays)."""
    br = np.unique(np.concatenate([_edge_normal_angles(V), _edge_normal_angles(W), [0.0]]))
    br = np.append(br, 2 * np.pi)
    best = 0.0
    for lo, hi in zip(br[:-1], br[1:]):
        if hi - lo < 1e-15:
            continue
        mid = 0.5 * (lo + hi)
        um = np.array([np.cos(mid), np.sin(mid)])
        w = V[np.argmax(V @ um)] - W[np.argmax(W @ um)]
        for th in (lo, hi):
            best = max(best, abs(np.cos(th) * w[0] + np.sin(th) * w[1]))
        phi = np.arctan2(w[1], w[0])
        for ph in (phi, phi + np.pi):
            ph = np.mod(ph, 2 * np.pi)
            if lo <= ph <= hi:
                best = max(best, float(np.linalg.norm(w)))
    return best


def regular_polygon(n):
    t = np.arange(2 ** n) * 2 * np.pi / 2 ** n
    return np.column_stack([np.cos(t), np.sin(t)])


def _min_gap(x):
    s = np.sort(x)
    return float(np.min(np.diff(s))) if s.size > 1 else np.inf


def _assemble(n, shears, rb=1.0, offset=(0.0, 0.0)):
    b0, lines = _fold_lines(n, shears)
    A_eq, b_eq, A_ub, b_ub = _system(n, b0, lines, shears, rb)
    V = _polygon(n, b0, lines, shears, rb)
    # moving the origin off the midpoint of the last fold side
    o = np.asarray(offset, dtype=float)
    b_eq = b_eq - A_eq[:, -2:] @ o
    b_ub = b_ub - A_ub[:, -2:] @ o
    return PerturbedLift(n, np.asarray(shears, float), np.array(lines), A_eq, b_eq, A_ub, b_ub,
                         V - o, info={"start_angle": b0, "b_radius": rb, "offset": o.tolist()})


def _check_lift(lift, n_dirs=24):
    """Projection of the H-system must be the tracked polygon."""
    if not _convex(lift.vertices):
        return False
    for th in np.linspace(0, 2 * np.pi, n_dirs, endpoint=False) + 0.1:
        u = np.array([np.cos(th), np.sin(th)])
        if abs(lift.projected_support(u) - np.max(lift.vertices @ u)) > 1e-8:
            return False
    return True


def build_perturbed_lift(n, eps, seed=0, shears=None):
    """Near-regular ``2^n``-gon as a projection, with all vertex distances different.

    Shears are drawn from ``[-eps/(4n), eps/(4n)]`` unless given, and the
    second triangle vertex gets a radius in ``1 +- eps/(4n)`` so that points
    on the fold lines are generic too.  The origin itself is the midpoint
    of the last fold side, which pairs up distances, so the polygon is also
    shifted by a small random offset.  Explicit shears use no radius change
    and no offset; all-zero shears give the regular polygon and skip the
    distinctness requirement.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if eps <= 0:
        raise ValueError("eps must be positive")
    reg = regular_polygon(n)
    if shears is not None:
        shears = np.asarray(shears, dtype=float)
        if shears.shape != (n,):
            raise ValueError(f"expected {n} shear parameters")
        lift = _assemble(n, shears)
        if not _check_lift(lift):
            raise ConstructionError("the folded polygon is not convex or disagrees with its lift")
        lift.hausdorff = polygon_hausdorff(lift.vertices, reg)
        lift.min_gap = _min_gap(lift.distances())
        return lift
    rng = np.random.default_rng(seed)
    amp = eps / (4 * n)
    for attempt in range(MAX_RESAMPLE):
        lift = _assemble(n, rng.uniform(-amp, amp, n), 1.0 + rng.uniform(-amp, amp),
                         rng.uniform(-amp, amp, 2))
        gap = _min_gap(lift.distances())
        if gap <= DISTINCT_TOL or not _check_lift(lift):
            continue
        h = polygon_hausdorff(lift.vertices, reg)
        if h >= eps:
            continue
        assert lift.n_facets <= 2 * n + 3
        assert lift.vertices.shape[0] == 2 ** n
        lift.hausdorff, lift.min_gap = h, gap
        lift.info["attempts"] = attempt + 1
        return lift
    raise ConstructionError(f"no admissible shears after {MAX_RESAMPLE} samples")


@dataclass
class LocalMaxima:
    count: int
    values: np.ndarray

    @property
    def distinct(self):
        return int(self.values.size)


def _distinct(vals, tol=DISTINCT_TOL):
    s = np.sort(vals)
    keep = [s[0]]
    for x in s[1:]:
        if x - keep[-1] > tol * max(1.0, abs(x)):
            keep.append(x)
    return np.array(keep)


def count_local_maxima(lift):
    """Vertices where ``x^2 + y^2`` decreases along both adjacent edges."""
    V = lift.vertices
    prev, nxt = np.roll(V, 1, axis=0), np.roll(V, -1, axis=0)
    dec = (np.einsum("ij,ij->i", V, prev - V) < 0) & (np.einsum("ij,ij->i", V, nxt - V) < 0)
    vals = np.einsum("ij,ij->i", V, V)[dec]
    if vals.size == 0:
        return LocalMaxima(0, vals)
    return LocalMaxima(int(dec.sum()), _distinct(vals))


def _form_radii(form):
    if isinstance(form, (tuple, list)) and len(form) == 2:
        a0, b0 = (np.asarray(f, dtype=float) for f in form)
        return a0, b0
    Q = np.asarray(form, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DimensionError("the form must be a square matrix or a pair of vectors")
    if not np.allclose(Q, Q.T, atol=1e-12):
        raise ValueError("the form must be symmetric")
    w, U = np.linalg.eigh(Q)
    scale = max(abs(w).max(), 1.0)
    if w.min() < -1e-12 * scale or np.sum(w > 1e-12 * scale) > 2:
        raise ValueError("the form must be positive semidefinite of rank at most two")
    w = np.clip(w, 0.0, None)
    return np.sqrt(w[-1]) * U[:, -1], np.sqrt(w[-2]) * U[:, -2]


def qp_to_ee_reduction(form, h, t=None, check=True):
    """EE instance for ``max f(x)`` subject to ``(x, h_k)^2 <= 1``.

    ``form`` is a symmetric rank-two matrix or a pair ``(a0, b0)`` with
    ``f(x) = (x, a0)^2 + (x, b0)^2``.  Vertex ``k`` is ``E(h_k cos t_k,
    h_k sin t_k)``; the optimum equals the squared EE norm of ``E0`` in ``P``.
    """
    H = np.atleast_2d(np.asarray(h, dtype=float))
    N, d = H.shape
    if t is None:
        t = np.full(N, np.pi / 4)
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.size != N:
        raise ValueError(f"need one angle per row of h ({N}), got {t.size}")
    if np.any(t <= 0) or np.any(t >= np.pi / 2):
        raise ValueError("the angles t_k must lie in the open interval (0, pi/2)")
    a0, b0 = _form_radii(form)
    if a0.size != d:
        raise DimensionError(f"form in R^{a0.size} vs constraints in R^{d}")
    e0 = Ellipse(a0, b0)
    p = EllipticPolytope(tuple(Ellipse(H[k] * np.cos(t[k]), H[k] * np.sin(t[k]))
                               for k in range(N)))
    if check:
        X = fibonacci_sphere(400, d) if d <= 3 else np.random.default_rng(0).standard_normal((400, d))
        lhs = np.max((X @ p.A.T) ** 2 + (X @ p.B.T) ** 2, axis=1)
        rhs = np.max((X @ H.T) ** 2, axis=1)
        assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)
    return e0, p


def qp_maximum(form, h, t=None, q=0.9999):
    """Bracket for the maximum of the form over ``{(x, h_k)^2 <= 1}``."""
    e0, p = qp_to_ee_reduction(form, h, t)
    br = ee_norm(e0, p, q=q)
    return NormBracket(br.lo ** 2, br.hi ** 2)


__all__ = ["PerturbedLift", "LocalMaxima", "ConstructionError", "build_perturbed_lift",
           "count_local_maxima", "qp_to_ee_reduction", "qp_maximum", "polygon_hausdorff",
           "regular_polygon"]
