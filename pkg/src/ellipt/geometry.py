"""Ellipses, elliptic polytopes and their support functions.

An ellipse ``E(a, b) = {a cos t + b sin t}`` is centred at the origin and
given by a pair of conjugate radii; its complex view is ``v = a + i b``.
An elliptic polytope is the convex hull of finitely many such ellipses.
"""
from dataclasses import dataclass, field
import json

import numpy as np

from . import kernels

EQ_TOL = 1e-9


class DimensionError(ValueError):
    pass


def _as_vec(x, name):
    v = np.array(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class Ellipse:
    """Centred ellipse with conjugate radii ``a`` and ``b``.

    ``b = 0`` (or ``b`` parallel to ``a``) gives the segment ``[-a, a]``.
    """
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _as_vec(self.a, "a")
        b = _as_vec(self.b, "b")
        if a.shape != b.shape:
            raise DimensionError(f"conjugate radii differ in length: {a.size} vs {b.size}")
        if a.size < 2:
            raise DimensionError("ellipses live in R^d with d >= 2")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_complex(cls, v):
        v = np.asarray(v, dtype=complex)
        return cls(v.real, v.imag)

    @classmethod
    def segment(cls, w):
        w = np.asarray(w, dtype=float)
        return cls(w, np.zeros_like(w))

    @property
    def d(self):
        return self.a.size

    @property
    def v(self):
        return self.a + 1j * self.b

    def __repr__(self):
        return f"Ellipse(a={self.a.tolist()}, b={self.b.tolist()})"

    def scaled(self, s):
        return Ellipse(s * self.a, s * self.b)

    def transformed(self, M):
        M = np.asarray(M, dtype=float)
        return Ellipse(M @ self.a, M @ self.b)

    def conjugate(self):
        return Ellipse(self.a, -self.b)

    def matrix(self):
        """The d x 2 matrix ``[a b]``; the ellipse is its image of the unit circle."""
        return np.column_stack([self.a, self.b])

    def gram(self):
        """``a a^T + b b^T``, so that ``support(x)^2 = x^T G x``."""
        return np.outer(self.a, self.a) + np.outer(self.b, self.b)

    def radius(self):
        """Largest distance from the origin, the spectral norm of ``[a b]``."""
        return float(np.linalg.norm(self.matrix(), 2))

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.multiply.outer(np.cos(t), self.a) + np.multiply.outer(np.sin(t), self.b)

    def is_degenerate(self):
        """True when ``a`` and ``b`` are exactly linearly dependent."""
        a, b = self.a, self.b
        if not a.any() or not b.any():
            return True
        return not np.any(np.outer(a, b) - np.outer(b, a))

    def reduced(self):
        """Rewrite an exactly degenerate ellipse as ``(r u, 0)``; others are returned as is."""
        if not self.is_degenerate() or not self.b.any():
            return self
        base = self.a if self.a.any() else self.b
        u = base / np.linalg.norm(base)
        r = np.hypot(np.linalg.norm(self.a), np.linalg.norm(self.b))
        return Ellipse(r * u, np.zeros_like(u))

    def to_json(self):
        return {"a": self.a.tolist(), "b": self.b.tolist()}


def ellipse(a, b=None):
    if b is None:
        return Ellipse.segment(a)
    return Ellipse(a, b)


@dataclass(frozen=True, eq=False)
class EllipticPolytope:
    """Convex hull ``co{E_1, ..., E_N}`` of centred ellipses in a common R^d."""
    ellipses: tuple

    def __post_init__(self):
        items = tuple(self.ellipses)
        if not items:
            raise ValueError("an elliptic polytope needs at least one ellipse")
        d = items[0].d
        for e in items:
            if e.d != d:
                raise DimensionError(f"mixed dimensions {d} and {e.d}")
        object.__setattr__(self, "ellipses", items)
        A = np.array([e.a for e in items])
        B = np.array([e.b for e in items])
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "_A", A)
        object.__setattr__(self, "_B", B)

    @property
    def A(self):
        """N x d array of first conjugate radii."""
        return self._A

    @property
    def B(self):
        """N x d array of second conjugate radii."""
        return self._B

    @property
    def d(self):
        return self.ellipses[0].d

    @property
    def N(self):
        return len(self.ellipses)

    def __len__(self):
        return len(self.ellipses)

    def __iter__(self):
        return iter(self.ellipses)

    def __getitem__(self, k):
        return self.ellipses[k]

    def without(self, k):
        return EllipticPolytope(self.ellipses[:k] + self.ellipses[k + 1:])

    def with_ellipses(self, extra):
        return EllipticPolytope(self.ellipses + tuple(extra))

    def transformed(self, M):
        return EllipticPolytope(tuple(e.transformed(M) for e in self.ellipses))

    def support(self, x):
        x = np.asarray(x, dtype=float)
        _check_dim(self.d, x)
        return float(np.sqrt(np.max((self.A @ x) ** 2 + (self.B @ x) ** 2)))

    def spans(self, w, tol=1e-10):
        """Whether ``w`` lies in the linear span of all conjugate radii."""
        M = np.vstack([self.A, self.B]).T
        if not M.any():
            return not np.any(w)
        coef, *_ = np.linalg.lstsq(M, w, rcond=None)
        return np.linalg.norm(M @ coef - w) <= tol * max(1.0, np.linalg.norm(w))

    def to_json(self):
        return {"dim": self.d, "ellipses": [e.to_json() for e in self.ellipses]}


def polytope(ellipses):
    return EllipticPolytope(tuple(ellipses))


@dataclass(frozen=True, eq=False)
class ComplexVertexSet:
    """Vertices ``v_k = a_k + i b_k`` of a balanced complex polytope."""
    vertices: tuple
    self_conjugate: bool = False

    def __post_init__(self):
        vs = tuple(np.array(v, dtype=complex).reshape(-1) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)

    @classmethod
    def from_polytope(cls, p):
        return cls(tuple(e.v for e in p))

    def __len__(self):
        return len(self.vertices)

    def real_polytope(self):
        return polytope(Ellipse.from_complex(v) for v in self.vertices)


def _check_dim(d, x):
    if np.shape(x)[-1] != d:
        raise DimensionError(f"expected vectors of length {d}, got {np.shape(x)[-1]}")


def support(e, x):
    """Support function ``sup_{w in E} <x, w> = sqrt(<x,a>^2 + <x,b>^2)``."""
    x = np.asarray(x, dtype=float)
    _check_dim(e.d, x)
    return float(np.hypot(x @ e.a, x @ e.b))


def elliptic_rotate(e, s):
    """Conjugate radii after moving the parameter origin by ``s``.

    ``a_s = a cos s + b sin s``, ``b_s = b cos s - a sin s``, so that
    ``a_s cos t + b_s sin t`` is the point at parameter ``t + s``.
    """
    c, sn = np.cos(s), np.sin(s)
    return Ellipse(e.a * c + e.b * sn, e.b * c - e.a * sn)


def separation_margin(e0, p, x):
    """``support(E0, x)^2 - max_k support(E_k, x)^2``.

    Positive for some ``x`` exactly when ``E0`` is not contained in ``P``.
    """
    x = np.asarray(x, dtype=float)
    if e0.d != p.d:
        raise DimensionError(f"ellipse in R^{e0.d} vs polytope in R^{p.d}")
    _check_dim(p.d, x)
    return float((x @ e0.a) ** 2 + (x @ e0.b) ** 2 - np.max((p.A @ x) ** 2 + (p.B @ x) ** 2))


def margin_on_grid(e0, p, X):
    """Vectorised ``separation_margin`` over the rows of ``X``."""
    return kernels.margin_grid(X, e0.a, e0.b, p.A, p.B)


def conjugate_closure(vs):
    """Add the componentwise conjugate of every vertex (real vertices once)."""
    out = []
    for v in vs.vertices:
        out.append(v)
    for v in vs.vertices:
        c = np.conj(v)
        if np.array_equal(c, v):
            continue
        if any(np.array_equal(c, u) for u in out):
            continue
        out.append(c)
    return ComplexVertexSet(tuple(out), self_conjugate=True)


def contained_in_single(e0, e1, tol=EQ_TOL):
    """Exact test for ``E0`` inside the filled ellipse ``co E1``.

    ``E1`` is the image of the unit disc under ``M = [a1 b1]``; ``E0`` fits
    iff ``[a0 b0] = M C`` for some ``C`` with spectral norm at most 1.
    """
    M = e1.matrix()
    M0 = e0.matrix()
    if not M0.any():
        return True
    C, *_ = np.linalg.lstsq(M, M0, rcond=None)
    scale = max(np.linalg.norm(M0), 1e-300)
    if np.linalg.norm(M @ C - M0) > tol * scale:
        return False
    return np.linalg.norm(C, 2) <= 1.0 + tol


def same_ellipse(e1, e2, tol=EQ_TOL, grid=360):
    """Set equality of two ellipses.

    Both the algebraic criterion (``v2 = z v1`` or ``z conj(v1)`` with
    ``|z| = 1``) and agreement of support functions on a direction grid in
    the span of the radii must hold.
    """
    if e1.d != e2.d:
        return False
    v1, v2 = e1.v, e2.v
    scale = max(np.linalg.norm(v1), np.linalg.norm(v2), 1e-300)
    algebraic = False
    for u in (v1, np.conj(v1)):
        nu = np.vdot(u, u).real
        if nu == 0.0:
            algebraic = np.linalg.norm(v2) <= tol * scale
            break
        z = np.vdot(u, v2) / nu
        if abs(abs(z) - 1.0) <= tol and np.linalg.norm(v2 - z * u) <= tol * scale:
            algebraic = True
            break
    if not algebraic:
        # degenerate ellipses admit other parametrisations of the same segment
        if not (e1.is_degenerate() or e2.is_degenerate()):
            return False
        if not (contained_in_single(e1, e2, tol) and contained_in_single(e2, e1, tol)):
            return False
    basis = np.linalg.qr(np.column_stack([e1.a, e1.b, e2.a, e2.b]))[0]
    coords = np.random.default_rng(0).standard_normal((grid, basis.shape[1]))
    X = np.vstack([coords @ basis.T, basis.T])
    h1 = np.hypot(X @ e1.a, X @ e1.b)
    h2 = np.hypot(X @ e2.a, X @ e2.b)
    Xn = np.linalg.norm(X, axis=1)
    return bool(np.max(np.abs(h1 - h2) / Xn) <= tol * scale * 10)


def fibonacci_sphere(n, d=3):
    """Quasi-uniform unit vectors: Fibonacci lattice for d = 3, angle grid for d = 2."""
    if d == 2:
        t = np.linspace(0.0, np.pi, n, endpoint=False)
        return np.column_stack([np.cos(t), np.sin(t)])
    if d != 3:
        raise ValueError("fibonacci_sphere supports d in {2, 3}")
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (1.0 + 5 ** 0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def random_directions(n, d, rng):
    X = rng.standard_normal((n, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


# --------------------------------------------------------------------------
# JSON ellipse-set format
# --------------------------------------------------------------------------

def ellipse_from_json(obj, d=None):
    a = obj["a"]
    b = obj.get("b")
    if b is None:
        b = [0.0] * len(a)
    e = Ellipse(a, b)
    if d is not None and e.d != d:
        raise DimensionError(f"ellipse of length {e.d} in a set declared dim={d}")
    return e


def polytope_from_json(obj):
    d = obj.get("dim")
    items = [ellipse_from_json(o, d) for o in obj["ellipses"]]
    return EllipticPolytope(tuple(items))


def load_ellipse_set(path):
    with open(path) as fh:
        return json.load(fh)


def dump_ellipse_set(p, target=None, extra=None):
    out = p.to_json()
    if target is not None:
        out["target"] = target.to_json()
    if extra:
        out.update(extra)
    return out


@dataclass
class NormBracket:
    """Certified interval ``[lo, hi]`` containing a Minkowski norm."""
    lo: float
    hi: float
    direction: np.ndarray = field(default=None, repr=False)
    in_span: bool = True

    @property
    def value(self):
        return self.hi if self.lo == self.hi else 0.5 * (self.lo + self.hi)

    def contains(self, x, tol=0.0):
        return self.lo - tol <= x <= self.hi + tol
