"""Desk-scale experiments: random samples, datasets, hull fractions, CPM factors."""
import csv
import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .applications import (MatrixFamily, SpectralError, jsr_invariant_polytope,
                           smp_candidates)
from .cpm import cpm_value
from .cutting import ee_norm, pe_norm_socp
from .engine import decide, reduce
from .geometry import Ellipse, EllipticPolytope, dump_ellipse_set
from .projection import choose_level, pe_norm_lp
from .solvers import LinearProgram, SolverError, solve_lp

log = logging.getLogger(__name__)

DISTRIBUTIONS = ("ball-uniform", "cube-uniform", "gaussian")
OBJECTS = ("points", "ellipses")
SCHEMA_VERSION = 1
CSV_FIELDS = ["schema", "run_id", "distribution", "d", "N", "seed", "object", "method", "q",
              "time_ms", "verdict", "value", "n_vertices"]


@dataclass(frozen=True)
class SampleSpec:
    distribution: str = "gaussian"
    d: int = 3
    N: int = 10
    seed: int = 0
    object: str = "ellipses"

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}; "
                             f"choose from {', '.join(DISTRIBUTIONS)}")
        if self.object not in OBJECTS:
            raise ValueError(f"unknown object {self.object!r}; choose points or ellipses")
        if self.d < 2 or self.N < 1:
            raise ValueError("need d >= 2 and N >= 1")


def _draw(rng, dist, n, d):
    if dist == "gaussian":
        return rng.standard_normal((n, d))
    if dist == "cube-uniform":
        return rng.uniform(-1.0, 1.0, (n, d))
    x = rng.standard_normal((n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * rng.random((n, 1)) ** (1.0 / d)


def sample(spec, rng=None):
    """Points ``(N, d)`` or an elliptic polytope with ``N`` vertices."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    if spec.object == "points":
        return _draw(rng, spec.distribution, spec.N, spec.d)
    a = _draw(rng, spec.distribution, spec.N, spec.d)
    b = _draw(rng, spec.distribution, spec.N, spec.d)
    return EllipticPolytope(tuple(Ellipse(a[k], b[k]) for k in range(spec.N)))


@dataclass
class Instance:
    id: str
    e0: Ellipse
    p: EllipticPolytope

    def to_json(self):
        return dump_ellipse_set(self.p, target=self.e0, extra={"id": self.id})


def _random_family(rng, d, m, smp_depth, tries=200):
    for _ in range(tries):
        fam = MatrixFamily(tuple(rng.standard_normal((d, d)) for _ in range(m)))
        c = smp_candidates(fam, smp_depth)
        if c[0].nonreal and c[0].simple and c[1].lam < c[0].lam * (1 - 1e-8):
            return fam
    raise RuntimeError("no family with a nonreal simple leading candidate found")


class _Enough(Exception):
    pass


def harvest_pairs(fam, limit=100, **jsr_kw):
    """The first ``limit`` (image, polytope) tests met by the invariant polytope run."""
    pairs = []

    def hook(img, cur, verdict):
        pairs.append((img, cur))
        if len(pairs) >= limit:
            raise _Enough

    try:
        jsr_invariant_polytope(fam, on_test=hook, **jsr_kw)
    except _Enough:
        pass
    return pairs


def gen_dataset(spec, kind="A", instances=1, per_polytope=100, m=2, smp_depth=4,
                max_iter=20):
    """Dataset A: ``E0`` and ``N`` ellipses sampled directly.

    Dataset B: pairs met while building invariant polytopes of random
    families of ``m`` Gaussian ``d x d`` matrices, the first
    ``per_polytope`` of each run.  Failed runs are skipped.
    """
    if kind == "A":
        out = []
        for k in range(instances):
            rng = np.random.default_rng([spec.seed, k])
            p = sample(spec, rng)
            e0 = sample(SampleSpec(spec.distribution, spec.d, 1, spec.seed, "ellipses"), rng)[0]
            out.append(Instance(f"A-{spec.seed}-{k}", e0, p))
        return out
    if kind != "B":
        raise ValueError("dataset kind must be 'A' or 'B'")
    out = []
    for k in range(instances):
        rng = np.random.default_rng([spec.seed, k, 7])
        try:
            fam = _random_family(rng, spec.d, m, smp_depth)
            pairs = harvest_pairs(fam, per_polytope, smp_depth=smp_depth, max_iter=max_iter)
        except (RuntimeError, SpectralError, SolverError) as exc:
            log.warning("dataset B run %d skipped: %s", k, exc)
            continue
        for j, (img, cur) in enumerate(pairs):
            out.append(Instance(f"B-{spec.seed}-{k}-{j}", img, cur))
    return out


def _point_in_hull(x, pts):
    n = pts.shape[0]
    lp = LinearProgram(np.zeros(n), np.vstack([pts.T, np.ones((1, n))]), np.append(x, 1.0))
    return solve_lp(lp).status == "optimal"


def hull_vertices_points(pts):
    """Indices of points outside the hull of the others (one LP each)."""
    keep = []
    for k in range(pts.shape[0]):
        others = np.delete(pts, k, axis=0)
        if others.shape[0] == 0 or not _point_in_hull(pts[k], others):
            keep.append(k)
    return np.array(keep, dtype=int)


def vertex_fraction(spec, method=None, q=0.995):
    """Share of the sample that are vertices of its hull."""
    s = sample(spec)
    if spec.object == "points":
        return len(hull_vertices_points(s)) / spec.N
    return reduce(s, method=method, q=q).N / spec.N


@dataclass
class FactorDensity:
    counts: np.ndarray
    edges: np.ndarray
    factors: np.ndarray
    excluded: int = 0

    @property
    def median(self):
        return float(np.median(self.factors)) if self.factors.size else np.nan


def cpm_factor(e0, p, closure=True, q_truth=0.9999, truth="projection"):
    """``t0 * ||E0||_P``: how much of the true norm the complex polytope method sees."""
    t0 = cpm_value(e0, p, closure=closure).t0_max
    if truth == "projection":
        n = choose_level(q_truth)

        def norm(w):
            return pe_norm_lp(w, p, n)
    else:
        def norm(w):
            return pe_norm_socp(w, p)
    br = ee_norm(e0, p, q=q_truth, norm=norm)
    return min(t0 * br.hi, 1.0), br


def factor_density(dataset, bins=20, closure=True, q_truth=0.9999, truth="projection"):
    """Histogram on ``[0, 1]`` of the per-instance CPM factor."""
    fs, bad = [], 0
    for inst in dataset:
        try:
            f, _ = cpm_factor(inst.e0, inst.p, closure, q_truth, truth)
        except SolverError as exc:
            log.warning("instance %s excluded: %s", inst.id, exc)
            bad += 1
            continue
        fs.append(f)
    fs = np.array(fs)
    counts, edges = np.histogram(fs, bins=bins, range=(0.0, 1.0))
    return FactorDensity(counts, edges, fs, bad)


@dataclass
class RunRecord:
    run_id: str
    distribution: str
    d: int
    N: int
    seed: int
    object: str
    method: str
    q: float
    time_ms: float
    verdict: str
    value: float
    n_vertices: int
    schema: int = field(default=SCHEMA_VERSION)

    def row(self):
        return {k: asdict(self)[k] for k in CSV_FIELDS}


def write_records(records, path, append=True):
    """Append rows to ``path``; the header is written only for a new file."""
    new = not os.path.exists(path) or not append or os.path.getsize(path) == 0
    with open(path, "a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if new:
            w.writeheader()
        for r in records:
            w.writerow(r.row())


def accuracy_runs(spec, methods=("cpm", "cutting", "projection", "mixed"),
                  qs=(0.9, 0.99, 0.999), instances=5):
    """Time and verdict of every method at every factor on dataset A."""
    out = []
    for inst in gen_dataset(spec, "A", instances):
        for m in methods:
            for q in (qs if m != "cpm" else (0.5,)):
                t = time.perf_counter()
                v = decide(inst.e0, inst.p, method=m, q=q)
                ms = 1e3 * (time.perf_counter() - t)
                out.append(RunRecord(inst.id, spec.distribution, spec.d, spec.N, spec.seed,
                                     spec.object, m, q, ms, v.outcome, float(v.value),
                                     inst.p.N))
    return out


def vertexfrac_runs(spec, Ns=(5, 10, 20, 40), seeds=range(3), method=None, q=0.995):
    out = []
    for N in Ns:
        for s in seeds:
            sp = SampleSpec(spec.distribution, spec.d, N, s, spec.object)
            t = time.perf_counter()
            f = vertex_fraction(sp, method, q)
            ms = 1e3 * (time.perf_counter() - t)
            out.append(RunRecord(f"V-{N}-{s}", sp.distribution, sp.d, N, s, sp.object,
                                 method or "default", q, ms, "fraction", f, round(f * N)))
    return out


__all__ = ["SampleSpec", "Instance", "RunRecord", "FactorDensity", "sample", "gen_dataset",
           "harvest_pairs", "vertex_fraction", "hull_vertices_points", "cpm_factor",
           "factor_density", "write_records", "accuracy_runs", "vertexfrac_runs",
           "DISTRIBUTIONS", "CSV_FIELDS"]
