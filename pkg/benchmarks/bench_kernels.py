"""Compare the numba kernels with their numpy fallbacks.

Run ``python3 benchmarks/bench_kernels.py``.  Both backends are timed in
one process by switching ``kernels.USE_NUMBA``; the first numba call is
excluded as compile time.  Outputs are compared before any timing is shown.
"""
import argparse
import time

import numpy as np

from ellipt import kernels
from ellipt._accel import HAVE_NUMBA
from ellipt.experiments import SampleSpec, sample
from ellipt.geometry import random_directions
from ellipt.projection import pe_norm_lp


def timed(fn, repeat):
    ts = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t)
    return float(np.median(ts)), out


def with_backend(use_numba, fn, repeat):
    old = kernels.USE_NUMBA
    kernels.USE_NUMBA = use_numba
    try:
        if use_numba:
            fn()  # compile
        return timed(fn, repeat)
    finally:
        kernels.USE_NUMBA = old


def cases(args):
    rng = np.random.default_rng(args.seed)
    p = sample(SampleSpec("gaussian", args.d, args.N, args.seed))
    X = random_directions(args.directions, args.d, rng)
    a0, b0 = rng.standard_normal(args.d), rng.standard_normal(args.d)
    w = rng.standard_normal(args.d)
    yield ("margin_grid", lambda: kernels.margin_grid(X, a0, b0, p.A, p.B),
           lambda u, v: np.allclose(u, v, rtol=1e-10, atol=1e-12))
    yield ("simplex (polygonal norm LP)", lambda: pe_norm_lp(w, p, args.level).hi,
           lambda u, v: abs(u - v) <= 1e-9 * max(1.0, abs(u)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=6)
    ap.add_argument("--N", type=int, default=30)
    ap.add_argument("--level", type=int, default=6)
    ap.add_argument("--directions", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy kernels can run")
    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for name, fn, same in cases(args):
        t_np, r_np = with_backend(False, fn, args.repeat)
        if HAVE_NUMBA:
            t_nb, r_nb = with_backend(True, fn, args.repeat)
            if not same(r_np, r_nb):
                raise SystemExit(f"{name}: backends disagree")
            print(f"{name:32s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:32s} {1e3 * t_np:12.2f} {'-':>12s} {'-':>8s}")


if __name__ == "__main__":
    main()
