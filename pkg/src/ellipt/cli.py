"""Command line front end.

JSON goes to stdout, logs to stderr.  Exit codes: 0 success, 1 negative
answer (Outside under ``--expect-inside``, no invariant polytope, a
leading eigenvalue unfit for the elliptic construction), 2 usage
or input errors, 3 solver failures.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from .applications import (MatrixFamily, SpectralError, appendix_family,
                           jsr_invariant_polytope, lyapunov_single)
from .cutting import ee_norm, pe_norm_socp
from .engine import METHODS, decide, reduce
from .exact import RootFindingError
from .experiments import (DISTRIBUTIONS, SampleSpec, accuracy_runs, gen_dataset,
                          vertexfrac_runs, write_records)
from .geometry import DimensionError, ellipse_from_json, polytope_from_json
from .hardness import ConstructionError, build_perturbed_lift, count_local_maxima
from .projection import choose_level, pe_norm_lp
from .solvers import SolverError
from .verdict import OUTSIDE, CertificateError

log = logging.getLogger("ellipt")

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class InputError(Exception):
    pass


def _factor(s):
    q = float(s)
    if not 0.0 < q < 1.0:
        raise argparse.ArgumentTypeError("q must lie in (0, 1)")
    return q


def _level(s):
    n = int(s)
    if n < 2:
        raise argparse.ArgumentTypeError("n must be at least 2")
    return n


def _read_json(path):
    if path == "-":
        text = sys.stdin.read()
    else:
        if not os.path.exists(path):
            raise InputError(f"{path}: no such file")
        with open(path) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                         f"{exc.msg}") from None


def _instance(obj, need_target=True):
    try:
        p = polytope_from_json(obj)
        t = obj.get("target", obj.get("e0"))
        e0 = ellipse_from_json(t, p.d) if t is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad ellipse set: {exc}") from None
    if need_target and e0 is None:
        raise InputError("the input needs a 'target' ellipse")
    return e0, p


def _emit(obj):
    json.dump(obj, sys.stdout, default=_default)
    sys.stdout.write("\n")


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


def _finite(x):
    return float(x) if np.isfinite(x) else None


def cmd_ee_decide(args):
    e0, p = _instance(_read_json(args.input))
    kw = {"q": args.q}
    v = decide(e0, p, method=args.method, **kw)
    out = v.to_json()
    _emit(out)
    if args.expect_inside and v.outcome == OUTSIDE:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_ee_norm(args):
    obj = _read_json(args.input)
    e0, p = _instance(obj, need_target=False)
    level = args.n
    if level is None and args.method == "projection":
        level = choose_level(args.q)

    def norm(w):
        return pe_norm_lp(w, p, level) if args.method == "projection" else pe_norm_socp(w, p)

    if "w" in obj:
        br = norm(np.asarray(obj["w"], dtype=float))
        kind = "vector"
    elif e0 is not None:
        br = ee_norm(e0, p, q=args.q, norm=norm)
        kind = "ellipse"
    else:
        raise InputError("give a vector 'w' or a 'target' ellipse")
    _emit({"kind": kind, "lo": _finite(br.lo), "hi": _finite(br.hi), "in_span": br.in_span,
           "method": args.method, "level": level})
    return EXIT_OK


def cmd_ee_reduce(args):
    _, p = _instance(_read_json(args.input), need_target=False)
    out, keep, _ = reduce(p, method=args.method, q=args.q, return_verdicts=True)
    res = out.to_json()
    res["kept"] = keep.tolist()
    res["removed"] = int(p.N - out.N)
    _emit(res)
    return EXIT_OK


def _family(obj, args):
    if getattr(args, "alpha", None) is not None or getattr(args, "beta", None) is not None:
        a = args.alpha if args.alpha is not None else obj.get("alpha")
        b = args.beta if args.beta is not None else obj.get("beta")
        if a is None or b is None:
            raise InputError("the appendix family needs both --alpha and --beta")
        return appendix_family(a, b)
    if obj.get("family") == "appendix":
        return appendix_family(obj["alpha"], obj["beta"])
    try:
        return MatrixFamily.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad matrix input: {exc}") from None


def cmd_lyapunov(args):
    fam = _family(_read_json(args.input), args)
    cert = lyapunov_single(fam[0], tol=args.tol, max_iter=args.max_iter, method=args.method,
                           q=args.q)
    out = cert.to_json()
    if args.verify:
        ok, _ = cert.reverify()
        out["reverified"] = ok
    _emit(out)
    return EXIT_OK if cert.converged else EXIT_NEGATIVE


def cmd_jsr(args):
    obj = _read_json(args.input) if args.input else {}
    fam = _family(obj, args)
    res = jsr_invariant_polytope(fam, smp_depth=args.smp_depth, tol=args.tol,
                                 max_iter=args.max_iter, method=args.method, q=args.q)
    out = res.to_json()
    out["lower"], out["upper"] = _finite(res.lower), _finite(res.upper)
    if args.verify and res.cert is not None:
        out["reverified"] = res.cert.reverify()[0]
    _emit(out)
    return EXIT_OK if res.success else EXIT_NEGATIVE


def cmd_hardness(args):
    lift = build_perturbed_lift(args.n, args.eps, seed=args.seed)
    m = count_local_maxima(lift)
    _emit({"n": args.n, "local_maxima": m.count, "distinct_values": m.distinct,
           "n_facets": lift.n_facets, "hausdorff": lift.hausdorff,
           "min_distance_gap": lift.min_gap, "values": m.values,
           "polyhedron": lift.to_json()})
    return EXIT_OK


def _spec(args, obj="ellipses"):
    return SampleSpec(args.distribution, args.d, args.N, args.seed, obj)


def _bench_chunk(job):
    kind, spec, extra = job
    if kind == "accuracy":
        return accuracy_runs(spec, instances=extra)
    return vertexfrac_runs(spec, Ns=extra, seeds=[spec.seed])


def cmd_bench(args):
    os.makedirs(args.out, exist_ok=True)
    if args.what == "dataset":
        ds = gen_dataset(_spec(args), args.kind, args.instances)
        paths = []
        for inst in ds:
            path = os.path.join(args.out, f"{inst.id}.json")
            with open(path, "w") as fh:
                json.dump(inst.to_json(), fh)
            paths.append(path)
        _emit({"kind": args.kind, "instances": len(paths), "files": paths})
        return EXIT_OK
    if args.what == "accuracy":
        jobs = [("accuracy", SampleSpec(args.distribution, args.d, args.N, args.seed + s),
                 args.instances) for s in range(args.seeds)]
    else:
        obj = "points" if args.points else "ellipses"
        Ns = [int(x) for x in args.sizes.split(",")]
        jobs = [("vertexfrac", SampleSpec(args.distribution, args.d, 1, args.seed + s, obj), Ns)
                for s in range(args.seeds)]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(args.jobs) as ex:
            chunks = list(ex.map(_bench_chunk, jobs))
    else:
        chunks = [_bench_chunk(j) for j in jobs]
    # deterministic order: by job, then by the order inside each job
    records = [r for ch in chunks for r in ch]
    path = os.path.join(args.out, f"{args.what}.csv")
    write_records(records, path, append=False)
    _emit({"experiment": args.what, "records": len(records), "csv": path})
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="ellipt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, method=True):
        if method:
            p.add_argument("--method", choices=METHODS, default=None)
        p.add_argument("--q", type=_factor, default=0.995)

    ee = sub.add_parser("ee", help="ellipse-in-polytope problems")
    esub = ee.add_subparsers(dest="ee_command", required=True)
    p = esub.add_parser("decide", help="decide whether the target ellipse lies in the hull")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--expect-inside", action="store_true")
    common(p)
    p.set_defaults(func=cmd_ee_decide)
    p = esub.add_parser("norm", help="norm of a vector 'w' or of the target ellipse")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--method", choices=("socp", "projection"), default="socp")
    p.add_argument("--n", type=_level, default=None)
    p.add_argument("--q", type=_factor, default=0.999)
    p.set_defaults(func=cmd_ee_norm)
    p = esub.add_parser("reduce", help="drop ellipses inside the hull of the others")
    p.add_argument("-i", "--input", required=True)
    common(p)
    p.set_defaults(func=cmd_ee_reduce)

    for name, fn in (("lyapunov", cmd_lyapunov), ("jsr", cmd_jsr)):
        p = sub.add_parser(name, help=f"{name} via invariant elliptic polytopes")
        p.add_argument("-i", "--input", required=(name == "lyapunov"))
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iter", type=int, default=200 if name == "lyapunov" else 100)
        p.add_argument("--method", choices=METHODS, default="mixed")
        p.add_argument("--q", type=_factor, default=0.995)
        p.add_argument("--verify", action="store_true", help="re-check with the projection method")
        if name == "jsr":
            p.add_argument("--smp-depth", type=int, default=6)
        p.set_defaults(func=fn)

    p = sub.add_parser("hardness", help="perturbed lifted polygon and its local maxima")
    p.add_argument("--n", type=_level, required=True)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_hardness)

    p = sub.add_parser("bench", help="experiments writing CSV or JSON files")
    p.add_argument("what", choices=("accuracy", "vertexfrac", "dataset"))
    p.add_argument("--out", default="bench_out")
    p.add_argument("--distribution", choices=DISTRIBUTIONS, default="gaussian")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--kind", choices=("A", "B"), default="A")
    p.add_argument("--sizes", default="5,10,20")
    p.add_argument("--points", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return ap


def run(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    env_seed = os.environ.get("ELLIPT_SEED")
    if env_seed is not None and hasattr(args, "seed"):
        try:
            args.seed = int(env_seed)
        except ValueError:
            log.error("ELLIPT_SEED must be an integer, got %r", env_seed)
            return EXIT_USAGE
    try:
        return args.func(args)
    except SpectralError as exc:
        log.error("%s", exc)
        _emit({"error": str(exc)})
        return EXIT_NEGATIVE
    except (InputError, DimensionError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (SolverError, RootFindingError, CertificateError, ConstructionError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
