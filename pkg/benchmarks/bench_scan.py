"""Compare the compiled and numpy guess loops on the same genuine Poly-LWE samples.

    python benchmarks/bench_scan.py --q 4194319 --ell 40 --repeats 5

Prints best-of-N wall time per backend and mode, and the speedup of the compiled
kernel when it is available.
"""

import argparse
import math
import time

from weakring.attack import SMALL_ERROR, SMALL_SET, build_error_set, evaluate_samples, scan
from weakring.attack.backend import available_backends
from weakring.numtheory import is_prime
from weakring.poly import IntPolynomial
from weakring.ringcore import RootInfo
from weakring.sampling import GaussianSpec, gen_polylwe_samples, uniform_secret


def best_of(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--q", type=int, default=4194319)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--ell", type=int, default=40)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)
    q = args.q
    if not is_prime(q):
        p.error(f"{q} is not prime")

    f = IntPolynomial.from_terms({args.n: 1, 0: q - 1})     # f(1) = q
    spec = GaussianSpec.from_sigma(args.sigma)
    ss = gen_polylwe_samples(f, q, spec, uniform_secret(q, args.n, 1), args.ell, seed=2)
    a, b = evaluate_samples(ss, 1)
    S = build_error_set(RootInfo(1, 1, q), args.sigma, args.n, q)

    kernels = available_backends()
    print(f"q = {q}, n = {args.n}, ell = {args.ell}, |S| = {S.cardinality}, "
          f"workers = {args.workers}, best of {args.repeats}")
    times = {}
    for mode, err_set in ((SMALL_ERROR, None), (SMALL_SET, S)):
        for name, kernel in kernels.items():
            run = lambda: scan(a, b, q, mode, err_set, workers=args.workers, kernel=kernel)  # noqa: E731
            surv = run()[0]
            times[mode, name] = t = best_of(run, args.repeats)
            print(f"{mode:12s} {name:7s} {t:9.4f} s  {q / t / 1e6:8.2f} Mguess/s  "
                  f"survivors {len(surv)}")
    if "cython" in kernels:
        for mode in (SMALL_ERROR, SMALL_SET):
            print(f"speedup {mode}: {times[mode, 'python'] / times[mode, 'cython']:.1f}x")
    else:
        print("compiled kernel not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
