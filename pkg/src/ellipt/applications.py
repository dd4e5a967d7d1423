"""Invariant elliptic polytopes: Lyapunov norms and the joint spectral radius.

Starting from the ellipse ``E(v)`` of a complex leading eigenvector, images
of the current vertices under the normalised matrices are added until no
image falls outside the hull.  Redundant ellipses are dropped each round.
"""
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .engine import decide, reduce
from .cutting import ee_norm
from .geometry import DimensionError, Ellipse, EllipticPolytope
from .projection import proj_decide
from .verdict import INSIDE, OUTSIDE, QINSIDE

log = logging.getLogger(__name__)

INFLATION = 1e-10
NONREAL_TOL = 1e-9
SIMPLE_GAP = 1e-9
EIG_RESIDUAL = 1e-10


class SpectralError(ValueError):
    """The leading eigenvalue does not allow the elliptic construction."""


@dataclass
class MatrixFamily:
    matrices: tuple

    def __post_init__(self):
        mats = [np.array(m, dtype=float) for m in self.matrices]
        if not mats:
            raise ValueError("a matrix family needs at least one matrix")
        d = mats[0].shape[0] if mats[0].ndim == 2 else -1
        for k, m in enumerate(mats):
            if m.ndim != 2 or m.shape != (d, d):
                raise DimensionError(f"matrix {k} has shape {m.shape}; expected ({d}, {d})")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"matrix {k} has non-finite entries")
        if d < 2:
            raise DimensionError("matrices must be at least 2 x 2")
        object.__setattr__(self, "matrices", tuple(mats))

    @property
    def d(self):
        return self.matrices[0].shape[0]

    @property
    def m(self):
        return len(self.matrices)

    def __len__(self):
        return self.m

    def __getitem__(self, k):
        return self.matrices[k]

    def product(self, word):
        """``A_{w_k} ... A_{w_1}``: the first letter acts first."""
        P = np.eye(self.d)
        for i in word:
            P = self.matrices[i] @ P
        return P

    def scaled(self, c):
        return MatrixFamily(tuple(c * m for m in self.matrices))

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["matrices"]))

    def to_json(self):
        return {"matrices": [m.tolist() for m in self.matrices]}


def appendix_family(alpha, beta):
    """The pair ``T0, T1`` whose product ``T0 T1`` maximises the spectrum."""
    ca, sa, cb, sb = np.cos(alpha), np.sin(alpha), np.cos(beta), np.sin(beta)
    T0 = np.array([[0.0, 0.0, 0.0], [-sa, ca, 0.0], [ca, sa, 0.0]])
    T1 = np.array([[0.0, -sb, cb], [0.0, cb, sb], [0.0, 0.0, 0.0]])
    return MatrixFamily((T0, T1))


@dataclass
class SmpCandidate:
    word: tuple
    length: int
    lam: float
    eigenvalue: complex
    v: np.ndarray
    simple: bool

    @property
    def nonreal(self):
        return np.linalg.norm(self.v.imag) > NONREAL_TOL * np.linalg.norm(self.v)


def leading_eigen(M):
    """Leading eigenvalue, eigenvector and simplicity flag of ``M``.

    The vector is scaled so that ``E(v)`` has largest radius one.  A
    conjugate pair counts as simple when no third eigenvalue shares its
    modulus and the eigenvalue itself is not repeated.
    """
    w, V = np.linalg.eig(M)
    mods = np.abs(w)
    k = int(np.argmax(mods + 1e-14 * (w.imag > 0)))
    lam = w[k]
    rho = mods[k]
    if rho == 0.0:
        return lam, V[:, k], False
    same = np.abs(mods - rho) <= SIMPLE_GAP * rho
    partners = 1 if abs(lam.imag) <= NONREAL_TOL * rho else 2
    repeated = np.sum(np.abs(w - lam) <= 1e-7 * rho) > 1
    simple = int(same.sum()) == partners and not repeated
    v = V[:, k]
    if abs(lam.imag) <= NONREAL_TOL * rho:
        v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    r = Ellipse.from_complex(v).radius()
    v = v / r
    res = np.linalg.norm(M @ v - lam * v) / max(rho, 1.0)
    if res > EIG_RESIDUAL:
        # polish with one inverse iteration step
        try:
            v = np.linalg.solve(M - lam * (1 + 1e-13) * np.eye(len(v)), v)
            v = v / Ellipse.from_complex(v).radius()
        except np.linalg.LinAlgError:
            pass
    return lam, v, simple


def _primitive_canonical(word):
    n = len(word)
    rots = [word[i:] + word[:i] for i in range(n)]
    if word != min(rots):
        return False
    # powers of shorter words add nothing
    for p in range(1, n):
        if n % p == 0 and word == word[:p] * (n // p):
            return False
    return True


def smp_candidates(fam, depth=6):
    """All primitive words up to cyclic shift, sorted by decreasing ``lam``."""
    if depth < 1:
        raise ValueError("smp_depth must be at least 1")
    out = []
    for L in range(1, depth + 1):
        for word in itertools.product(range(fam.m), repeat=L):
            if not _primitive_canonical(word):
                continue
            lam_c, v, simple = leading_eigen(fam.product(word))
            lam = abs(lam_c) ** (1.0 / L)
            out.append(SmpCandidate(word, L, float(lam), complex(lam_c), v, simple))
    out.sort(key=lambda c: (-c.lam, c.length, c.word))
    return out


@dataclass
class InvariantPolytopeCert:
    """``A P`` inside ``lam (1 + tol) P`` for every matrix of the family.

    ``table`` holds one row per (matrix, vertex): the verdict obtained when
    the image of that vertex was tested, or ``"vertex"`` when the image was
    itself added to the polytope.
    """
    polytope: EllipticPolytope
    lam: float
    matrices: tuple
    table: list
    tol: float = 1e-6
    inflation: float = INFLATION
    iterations: int = 0
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.polytope.N

    def images(self):
        s = 1.0 / (self.lam * (1.0 + self.inflation))
        for i, A in enumerate(self.matrices):
            for k, e in enumerate(self.polytope):
                yield i, k, e.transformed(A).scaled(s)

    def reverify(self, q=0.999, tol=None):
        """Check every image with the projection method.

        An image passes when it is Inside, or QInside at a factor of at
        least ``1 / (1 + tol)``; the first check runs at ``q`` and only
        undecided images are retried at the finer factor.
        """
        tol = self.tol if tol is None else tol
        target = 1.0 / (1.0 + tol)
        rows = []
        for i, k, img in self.images():
            v = proj_decide(img, self.polytope, q=q)
            if v.outcome == QINSIDE and v.q < target:
                v = proj_decide(img, self.polytope, q=target, max_iter=400)
            ok = v.outcome == INSIDE or (v.outcome == QINSIDE and v.q >= target)
            rows.append({"matrix": i, "vertex": k, "outcome": v.outcome, "q": v.q, "ok": ok})
        return all(r["ok"] for r in rows), rows

    def to_json(self):
        return {
            "lambda": self.lam,
            "tol": self.tol,
            "iterations": self.iterations,
            "converged": self.converged,
            "n_vertices": self.N,
            "polytope": self.polytope.to_json()["ellipses"],
            "table": self.table,
        }


def _run(mats, lam, seeds, max_iter, method, q, inflation, on_test):
    """Core loop; returns (polytope, table, iterations, converged, history)."""
    s = 1.0 / (lam * (1.0 + inflation))
    scaled = [A * s for A in mats]
    ids = itertools.count()
    verts = {next(ids): e for e in seeds}
    p = EllipticPolytope(tuple(verts.values()))
    if p.N > 1:
        p, keep = reduce(p, method=method, q=q, return_verdicts=True)[:2]
        keys = list(verts)
        verts = {keys[j]: verts[keys[j]] for j in keep}
    frontier = list(verts)
    table = {}
    history = [len(verts)]
    it = 0
    while frontier:
        if it >= max_iter:
            return verts, table, it, False, history
        it += 1
        new = {}
        for key in frontier:
            for i, A in enumerate(scaled):
                img = verts[key].transformed(A)
                cur = EllipticPolytope(tuple(verts.values()) + tuple(new.values()))
                v = decide(img, cur, method=method, q=q)
                if on_test is not None:
                    on_test(img, cur, v)
                if v.outcome == INSIDE:
                    table[(i, key)] = {"outcome": v.outcome, "q": v.q, "method": v.method}
                else:
                    table[(i, key)] = {"outcome": "vertex", "was": v.outcome, "q": v.q,
                                       "method": v.method}
                    new[next(ids)] = img
        if not new:
            break
        allv = {**verts, **new}
        keys = list(allv)
        _, keep, _ = reduce(EllipticPolytope(tuple(allv.values())), method=method, q=q,
                            return_verdicts=True)
        verts = {keys[j]: allv[keys[j]] for j in keep}
        frontier = [k for k in new if k in verts]
        history.append(len(verts))
        log.debug("iteration %d: %d vertices, %d new", it, len(verts), len(frontier))
    return verts, table, it, True, history


def _make_cert(mats, lam, verts, table, it, converged, history, tol, inflation, **diag):
    keys = list(verts)
    rows = []
    for j, key in enumerate(keys):
        for i in range(len(mats)):
            row = table.get((i, key))
            if row is not None:
                rows.append({"matrix": i, "vertex": j, **row})
    p = EllipticPolytope(tuple(verts.values()))
    return InvariantPolytopeCert(p, float(lam), tuple(mats), rows, tol, inflation, it,
                                 converged, {"vertex_history": history, **diag})


def _transverse_segments(A, lam, v):
    """Coordinate segments whose eigenplane shadow stays inside ``E(v) / 2``."""
    w, V = np.linalg.eig(A)
    k = int(np.argmin(np.abs(w - lam)))
    Vinv = np.linalg.inv(V)
    # component of x along the leading eigenvector, in units of V[:, k]
    j = int(np.argmax(np.abs(v)))
    scale = V[j, k] / v[j]
    c = np.abs(Vinv[k] * scale)
    d = A.shape[0]
    out = []
    for i in range(d):
        eps = 1.0 if c[i] == 0 else min(1.0, 0.25 / c[i])
        seg = np.zeros(d)
        seg[i] = eps
        out.append(Ellipse.segment(seg))
    return out


def lyapunov_single(A, tol=1e-6, max_iter=200, method="mixed", q=0.995,
                    full_dimensional=True, inflation=INFLATION, on_test=None):
    """Elliptic polytope ``P`` with ``A P`` inside ``rho(A) (1 + tol) P``.

    The leading eigenvalue must be nonreal and simple.  With
    ``full_dimensional`` the seed also holds short coordinate segments so
    that ``P`` is a body and its gauge a norm.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    lam, v, simple = leading_eigen(A)
    rho = abs(lam)
    if rho == 0.0:
        raise SpectralError("the matrix is nilpotent; rho(A) = 0")
    if np.linalg.norm(v.imag) <= NONREAL_TOL * np.linalg.norm(v):
        raise SpectralError("the leading eigenvalue is real; use an ordinary polytope "
                            "construction instead")
    if not simple:
        raise SpectralError("the leading eigenvalue is not simple")
    seeds = [Ellipse.from_complex(v)]
    if full_dimensional and A.shape[0] > 2:
        seeds += _transverse_segments(A, lam, v)
    verts, table, it, conv, hist = _run([A], rho, seeds, max_iter, method, q, inflation,
                                        on_test)
    cert = _make_cert([A], rho, verts, table, it, conv, hist, tol, inflation,
                      eigenvalue=complex(lam))
    if not conv:
        log.warning("no invariant polytope after %d iterations", max_iter)
    return cert


@dataclass
class JsrResult:
    success: bool
    lam: float
    lower: float
    upper: float
    smp: SmpCandidate = None
    cert: InvariantPolytopeCert = None
    diagnosis: str = ""

    def to_json(self):
        out = {"success": self.success, "jsr": self.lam if self.success else None,
               "lower": self.lower, "upper": self.upper, "diagnosis": self.diagnosis}
        if self.smp is not None:
            out["smp"] = list(self.smp.word)
        if self.cert is not None:
            out["n_vertices"] = self.cert.N
            out["iterations"] = self.cert.iterations
        return out


def _scalar_family(fam):
    d = fam.d
    cs = []
    for M in fam.matrices:
        c = M[0, 0]
        if np.any(M - c * np.eye(d)):
            return None
        cs.append(c)
    return cs


def _unit_body(d):
    E = np.eye(d)
    out = [Ellipse(E[i], E[i + 1]) for i in range(0, d - 1, 2)]
    if d % 2:
        out.append(Ellipse.segment(E[d - 1]))
    return EllipticPolytope(tuple(out))


def _upper_bound(mats, lam, p):
    worst = 0.0
    for A in mats:
        for e in p:
            br = ee_norm(e.transformed(A / lam), p, q=0.99)
            worst = max(worst, br.hi)
    return lam * worst


def jsr_invariant_polytope(fam, smp_depth=6, tol=1e-6, max_iter=100, method="mixed",
                           q=0.995, inflation=INFLATION, on_test=None):
    """Joint spectral radius by an invariant elliptic polytope.

    The best primitive word up to length ``smp_depth`` gives ``lam``; the
    polytope grown from ``E(v)`` of its leading eigenvector then proves
    ``rho(fam) = lam`` when the iteration closes.
    """
    if not isinstance(fam, MatrixFamily):
        fam = MatrixFamily(tuple(fam))
    scal = _scalar_family(fam)
    if scal is not None:
        lam = float(max(abs(c) for c in scal))
        word = (int(np.argmax(np.abs(scal))),)
        smp = SmpCandidate(word, 1, lam, complex(scal[word[0]]), np.eye(fam.d)[0] + 0j, True)
        body = _unit_body(fam.d)
        rows = [{"matrix": i, "vertex": k, "outcome": INSIDE, "q": 1.0, "method": "scalar"}
                for i in range(fam.m) for k in range(body.N)]
        cert = InvariantPolytopeCert(body, lam, fam.matrices, rows, tol, inflation)
        return JsrResult(True, lam, lam, lam, smp, cert, "scalar family")
    if fam.m == 1:
        A = fam[0]
        lam_c, v, simple = leading_eigen(A)
        smp = SmpCandidate((0,), 1, float(abs(lam_c)), complex(lam_c), v, simple)
        try:
            cert = lyapunov_single(A, tol=tol, max_iter=max_iter, method=method, q=q,
                                   inflation=inflation, on_test=on_test)
        except SpectralError as exc:
            return JsrResult(False, smp.lam, smp.lam, np.inf, smp, None, str(exc))
        if cert.converged:
            return JsrResult(True, smp.lam, smp.lam, smp.lam, smp, cert)
        up = _upper_bound(fam.matrices, smp.lam, cert.polytope)
        return JsrResult(False, smp.lam, smp.lam, up, smp, cert, "max_iter reached")

    cands = smp_candidates(fam, smp_depth)
    best = cands[0]
    lower = best.lam
    if best.lam == 0.0:
        return JsrResult(False, 0.0, 0.0, np.inf, best, None, "all products are nilpotent")
    ties = [c for c in cands[1:] if abs(c.lam - best.lam) <= 1e-10 * best.lam]
    if ties:
        return JsrResult(False, lower, lower, np.inf, best, None,
                         f"the leading value is shared by words {best.word} and "
                         f"{ties[0].word}; the candidate is not unique")
    if not best.simple:
        return JsrResult(False, lower, lower, np.inf, best, None,
                         f"the leading eigenvalue of word {best.word} is not simple")
    if not best.nonreal:
        return JsrResult(False, lower, lower, np.inf, best, None,
                         f"the leading eigenvalue of word {best.word} is real; the ordinary "
                         "polytope construction applies")
    seeds = [Ellipse.from_complex(best.v)]
    verts, table, it, conv, hist = _run(fam.matrices, best.lam, seeds, max_iter, method, q,
                                        inflation, on_test)
    cert = _make_cert(fam.matrices, best.lam, verts, table, it, conv, hist, tol, inflation,
                      smp=list(best.word))
    if conv:
        return JsrResult(True, best.lam, best.lam, best.lam, best, cert)
    up = _upper_bound(fam.matrices, best.lam, cert.polytope)
    return JsrResult(False, best.lam, lower, up, best, cert, "max_iter reached")


__all__ = ["MatrixFamily", "SmpCandidate", "InvariantPolytopeCert", "JsrResult",
           "SpectralError", "appendix_family", "leading_eigen", "smp_candidates",
           "lyapunov_single", "jsr_invariant_polytope", "OUTSIDE"]
